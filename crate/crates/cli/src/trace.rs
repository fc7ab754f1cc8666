//! CSV export of solver diagnostics.

use std::io::Write;

use desmoke_core::SolveDiagnostics;

pub const HEADER: &str = "iter,energy,primal_res,dual_res";

/// One row per iteration, full-precision scientific notation, followed by
/// a `# converged=...` comment line.
pub fn write_trace<W: Write>(mut w: W, diag: &SolveDiagnostics) -> std::io::Result<()> {
    writeln!(w, "{HEADER}")?;
    for i in 0..diag.iterations {
        writeln!(
            w,
            "{},{:.17e},{:.17e},{:.17e}",
            i + 1,
            diag.energy_trace[i],
            diag.primal_residual_trace[i],
            diag.dual_residual_trace[i]
        )?;
    }
    writeln!(w, "# converged={}", diag.converged)
}
