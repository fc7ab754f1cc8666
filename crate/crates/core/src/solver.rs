//! Alternating-direction augmented-Lagrangian iteration for the smoke
//! layer.
//!
//! The split problem is `min lambda/2 ||F - I||^2 + sum_i |u_i|` subject to
//! `D F = u`. Each cycle performs, in order:
//!
//! 1. `F <- argmin_F L(F, u, y)` via [`f_update`];
//! 2. `u <- shrink(D F + y / rho, rho)`;
//! 3. `y <- y + rho (D F - u)`.
//!
//! The iteration starts from `F = I`, `u = D I`, `y = 0` and stops once both
//! residuals drop below `tol` relative to their scales, or after
//! `max_iter` cycles.

use serde::{Deserialize, Serialize};

use crate::diffops::{apply_d, apply_dt};
use crate::error::{Error, Result};
use crate::spectral::{build_kernel, f_update, SpectralKernel};
use crate::tensor::{GradientStack, ImageTensor};
use crate::variational::{shrink, SolverParams};

/// Per-iteration record of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    /// Energy of `F` after each iteration.
    pub energy_trace: Vec<f64>,
    /// `||D F - u||` after each iteration.
    pub primal_residual_trace: Vec<f64>,
    /// `rho ||D^T (u_new - u_old)||` after each iteration.
    pub dual_residual_trace: Vec<f64>,
    pub converged: bool,
}

/// Quantities measured at the end of one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub energy: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `max(||D F||, ||u||, epsilon)`.
    pub primal_scale: f64,
    /// `max(||D^T y||, epsilon)`.
    pub dual_scale: f64,
}

impl IterationRecord {
    pub fn converged(&self, tol: f64) -> bool {
        self.primal_residual <= tol * self.primal_scale
            && self.dual_residual <= tol * self.dual_scale
    }
}

/// Iteration state of one solve. Owns `F`, `u` and `y`; borrows the input
/// and the kernel.
#[derive(Debug)]
pub struct SmokeSolver<'a> {
    image: &'a ImageTensor,
    kernel: &'a SpectralKernel,
    params: SolverParams,
    f: ImageTensor,
    u: GradientStack,
    y: GradientStack,
}

impl<'a> SmokeSolver<'a> {
    pub fn new(
        image: &'a ImageTensor,
        params: &SolverParams,
        kernel: &'a SpectralKernel,
    ) -> Result<Self> {
        params.validate()?;
        if !kernel.matches(image.shape(), params) {
            return Err(Error::KernelMismatch);
        }
        Ok(Self {
            image,
            kernel,
            params: *params,
            f: image.clone(),
            u: apply_d(image, &params.betas),
            y: GradientStack::zeros_like(image),
        })
    }

    pub fn smoke(&self) -> &ImageTensor {
        &self.f
    }

    pub fn split(&self) -> &GradientStack {
        &self.u
    }

    pub fn multipliers(&self) -> &GradientStack {
        &self.y
    }

    pub fn into_smoke(self) -> ImageTensor {
        self.f
    }

    /// Runs one F / u / y cycle.
    pub fn step(&mut self) -> Result<IterationRecord> {
        let p = &self.params;
        let f = f_update(self.image, &self.u, &self.y, self.kernel, p)?;
        let df = apply_d(&f, &p.betas);

        let v = df.combine(1.0, &self.y, 1.0 / p.rho)?;
        let u = shrink(&v, p.rho, p.epsilon);

        let gap = df.sub(&u)?;
        let y = self.y.combine(1.0, &gap, p.rho)?;

        let dual_residual = p.rho * apply_dt(&u.sub(&self.u)?, &p.betas).norm();
        let primal_residual = gap.norm();

        let fidelity: f64 = f
            .as_slice()
            .iter()
            .zip(self.image.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let tv: f64 = df.magnitudes().as_slice().iter().sum();

        let record = IterationRecord {
            energy: 0.5 * p.lambda * fidelity + tv,
            primal_residual,
            dual_residual,
            primal_scale: df.norm().max(u.norm()).max(p.epsilon),
            dual_scale: apply_dt(&y, &p.betas).norm().max(p.epsilon),
        };
        self.f = f;
        self.u = u;
        self.y = y;
        Ok(record)
    }

    /// Iterates until convergence or `max_iter`.
    pub fn run(&mut self) -> Result<SolveDiagnostics> {
        let mut diag = SolveDiagnostics {
            iterations: 0,
            energy_trace: Vec::with_capacity(self.params.max_iter),
            primal_residual_trace: Vec::with_capacity(self.params.max_iter),
            dual_residual_trace: Vec::with_capacity(self.params.max_iter),
            converged: false,
        };
        for _ in 0..self.params.max_iter {
            let rec = self.step()?;
            diag.iterations += 1;
            diag.energy_trace.push(rec.energy);
            diag.primal_residual_trace.push(rec.primal_residual);
            diag.dual_residual_trace.push(rec.dual_residual);
            if rec.converged(self.params.tol) {
                diag.converged = true;
                break;
            }
        }
        log::debug!(
            "smoke solve: {} iterations, converged = {}",
            diag.iterations,
            diag.converged
        );
        Ok(diag)
    }
}

/// Estimates the smoke layer of `image`. Non-convergence is reported in the
/// diagnostics, not as an error.
pub fn solve_smoke(
    image: &ImageTensor,
    params: &SolverParams,
) -> Result<(ImageTensor, SolveDiagnostics)> {
    let kernel = build_kernel(image.height(), image.width(), params)?;
    solve_smoke_with_kernel(image, params, &kernel)
}

/// Like [`solve_smoke`] but reuses a kernel built for this shape and
/// parameter set.
pub fn solve_smoke_with_kernel(
    image: &ImageTensor,
    params: &SolverParams,
    kernel: &SpectralKernel,
) -> Result<(ImageTensor, SolveDiagnostics)> {
    let mut solver = SmokeSolver::new(image, params, kernel)?;
    let diag = solver.run()?;
    Ok((solver.into_smoke(), diag))
}
