//! Single-image subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use desmoke_core::imageio::{load_image, save_image};
use desmoke_core::synth::{apply_smoke, generate_smoke_field};
use desmoke_core::{desmoke, ImageTensor, MetricReport};
use serde::Serialize;

use crate::args::{DesmokeArgs, MetricsArgs, SynthArgs};
use crate::error::{sidecar_path, CliError};
use crate::trace::write_trace;

#[derive(Debug, Serialize)]
struct SmokeSidecar {
    /// Factor the stored image was multiplied by.
    scale: f64,
    rescaled: bool,
    min: f64,
    max: f64,
    alpha: [f64; 3],
}

/// Writes the smoke layer either rescaled by `1 / max` or clamped, plus a
/// JSON sidecar recording the scale.
fn write_smoke(
    smoke: &ImageTensor,
    alpha: [f64; 3],
    path: &Path,
    raw: bool,
) -> Result<(), CliError> {
    let max = smoke.max();
    let scale = if raw || max <= 0.0 { 1.0 } else { 1.0 / max };
    save_image(&smoke.scale(scale), path)?;
    let meta = SmokeSidecar {
        scale,
        rescaled: !raw,
        min: smoke.min(),
        max,
        alpha,
    };
    let side = sidecar_path(path);
    let f = File::create(&side).map_err(|e| CliError::io_at(&side, e))?;
    serde_json::to_writer_pretty(f, &meta)?;
    Ok(())
}

pub fn cmd_desmoke<W: Write>(args: &DesmokeArgs, out: &mut W) -> Result<(), CliError> {
    let params = args.solver.params();
    params.validate()?;
    let image = load_image(&args.input)?;
    let result = desmoke(&image, &params)?;
    save_image(&result.enhanced, &args.output)?;

    if let Some(path) = &args.emit_smoke {
        write_smoke(&result.smoke, result.alpha, path, args.smoke_raw)?;
    }
    if let Some(path) = &args.trace {
        let f = File::create(path).map_err(|e| CliError::io_at(path, e))?;
        let mut w = BufWriter::new(f);
        write_trace(&mut w, &result.diag)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io_at(path, e))?;
    }
    if !result.diag.converged {
        log::warn!(
            "{}: no convergence after {} iterations",
            args.input.display(),
            result.diag.iterations
        );
    }
    writeln!(
        out,
        "{}: iterations={} converged={} alpha=[{:.6}, {:.6}, {:.6}]",
        args.output.display(),
        result.diag.iterations,
        result.diag.converged,
        result.alpha[0],
        result.alpha[1],
        result.alpha[2]
    )
    .map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Debug, Serialize)]
struct MetricsDocument<'a> {
    original: &'a Path,
    enhanced: &'a Path,
    #[serde(skip_serializing_if = "Option::is_none")]
    truth: Option<&'a Path>,
    #[serde(flatten)]
    report: &'a MetricReport,
}

/// Prints a key/value table followed by a single-line JSON document.
pub fn cmd_metrics<W: Write>(args: &MetricsArgs, out: &mut W) -> Result<(), CliError> {
    let original = load_image(&args.input)?;
    let enhanced = load_image(&args.enhanced)?;
    if original.shape() != enhanced.shape() {
        return Err(CliError::Processing(format!(
            "{} is {:?} but {} is {:?}",
            args.input.display(),
            original.shape(),
            args.enhanced.display(),
            enhanced.shape()
        )));
    }
    let truth = args.truth.as_ref().map(load_image).transpose()?;
    let report = MetricReport::evaluate(&original, &enhanced, truth.as_ref())?;
    let doc = MetricsDocument {
        original: &args.input,
        enhanced: &args.enhanced,
        truth: args.truth.as_deref(),
        report: &report,
    };
    let json = serde_json::to_string(&doc)?;
    writeln!(out, "{report}\n{json}").map_err(|e| CliError::Io(e.to_string()))
}

fn default_field_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "synth".into());
    let ext = output
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "png".into());
    output.with_file_name(format!("{stem}_smoke.{ext}"))
}

pub fn cmd_synth<W: Write>(args: &SynthArgs, out: &mut W) -> Result<(), CliError> {
    let spec = args.spec();
    spec.validate()?;
    let clean = load_image(&args.input)?;
    let field = generate_smoke_field(clean.height(), clean.width(), &spec)?;
    let smoked = apply_smoke(&clean, &field)?;
    save_image(&smoked, &args.output)?;
    let field_path = args
        .emit_smoke
        .clone()
        .unwrap_or_else(|| default_field_path(&args.output));
    save_image(&field, &field_path)?;
    writeln!(
        out,
        "seed: {}\nsmoked: {}\nsmoke field: {}",
        spec.seed,
        args.output.display(),
        field_path.display()
    )
    .map_err(|e| CliError::Io(e.to_string()))
}
