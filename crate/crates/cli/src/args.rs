use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use desmoke_core::{Betas, SmokeSpec, SolverParams};

#[derive(Debug, Parser)]
#[command(name = "desmoke", version, about = "Variational smoke removal for RGB images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Remove smoke from a single image.
    Desmoke(DesmokeArgs),
    /// Compare an enhanced image against its original.
    Metrics(MetricsArgs),
    /// Add synthetic smoke to a clean image.
    Synth(SynthArgs),
    /// Desmoke every image in a directory.
    Batch(BatchArgs),
}

/// Solver parameters. Defaults: lambda = 1, beta = (1, 1, 1), rho = 5.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long = "beta-x", default_value_t = 1.0)]
    pub beta_x: f64,
    #[arg(long = "beta-y", default_value_t = 1.0)]
    pub beta_y: f64,
    #[arg(long = "beta-c", default_value_t = 1.0)]
    pub beta_c: f64,
    #[arg(long, default_value_t = 5.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    #[arg(long = "max-iter", default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

impl SolverArgs {
    pub fn params(&self) -> SolverParams {
        SolverParams {
            lambda: self.lambda,
            betas: Betas {
                x: self.beta_x,
                y: self.beta_y,
                c: self.beta_c,
            },
            rho: self.rho,
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DesmokeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Also write the smoke layer, rescaled by 1/max for viewing.
    #[arg(long = "emit-smoke", value_name = "PATH")]
    pub emit_smoke: Option<PathBuf>,
    /// Write the smoke layer clamped to [0, 1] instead of rescaled.
    #[arg(long = "smoke-raw", requires = "emit_smoke")]
    pub smoke_raw: bool,
    /// Per-iteration trace as CSV.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    /// Original (smoked) image.
    #[arg(long)]
    pub input: PathBuf,
    /// Enhanced image.
    #[arg(long)]
    pub enhanced: PathBuf,
    /// Clean ground truth; enables PSNR.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Clean image.
    #[arg(long)]
    pub input: PathBuf,
    /// Smoked image to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Where to write the ground-truth smoke field; defaults to
    /// `<output stem>_smoke.<ext>` next to the output.
    #[arg(long = "emit-smoke", value_name = "PATH")]
    pub emit_smoke: Option<PathBuf>,
    #[arg(long, default_value_t = SmokeSpec::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = SmokeSpec::default().strength)]
    pub strength: f64,
    #[arg(long, default_value_t = SmokeSpec::default().smoothness)]
    pub smoothness: f64,
    #[arg(long = "chroma-jitter", default_value_t = SmokeSpec::default().chroma_jitter)]
    pub chroma_jitter: f64,
}

impl SynthArgs {
    pub fn spec(&self) -> SmokeSpec {
        SmokeSpec {
            seed: self.seed,
            strength: self.strength,
            smoothness: self.smoothness,
            chroma_jitter: self.chroma_jitter,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    /// Directory of PNG/PPM images.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for enhanced images and the summary.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: u32,
    #[command(flatten)]
    pub solver: SolverArgs,
}
