//! Decomposition of smoke-degraded RGB images into a smooth, nearly
//! colour-neutral smoke layer and an enhanced layer.
//!
//! The smoke layer `F` is the minimiser of a fidelity term plus an
//! isotropic total variation over the horizontal, vertical and channel
//! directions; it is found with an alternating-direction augmented
//! Lagrangian iteration whose linear step is solved exactly in the Fourier
//! domain. The enhanced image is `J = I - alpha * F` with one weight per
//! channel.
//!
//! ```no_run
//! use desmoke_core::{desmoke, imageio, SolverParams};
//!
//! let input = imageio::load_image("frame.png")?;
//! let result = desmoke(&input, &SolverParams::default())?;
//! imageio::save_image(&result.enhanced, "frame_desmoked.png")?;
//! # Ok::<(), desmoke_core::Error>(())
//! ```

pub mod diffops;
pub mod error;
pub mod imageio;
pub mod metrics;
pub mod pipeline;
pub mod solver;
pub mod spectral;
pub mod synth;
pub mod tensor;
pub mod variational;

pub use diffops::{apply_d, apply_dt, Axis, Betas};
pub use error::{Error, Result};
pub use metrics::{MetricReport, Psnr};
pub use pipeline::{compute_alpha, desmoke, desmoke_with_kernel, DecompositionResult};
pub use solver::{solve_smoke, solve_smoke_with_kernel, SolveDiagnostics};
pub use spectral::{build_kernel, SpectralKernel};
pub use synth::SmokeSpec;
pub use tensor::{GradientStack, ImageTensor, CHANNELS};
pub use variational::{energy, shrink, tv_norm, SolverParams};
