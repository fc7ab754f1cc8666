//! End-to-end desmoking: smoke layer, per-channel weights, enhanced image.

use crate::error::Result;
use crate::solver::{solve_smoke_with_kernel, SolveDiagnostics};
use crate::spectral::{build_kernel, SpectralKernel};
use crate::tensor::{ImageTensor, CHANNELS};
use crate::variational::SolverParams;

/// Output of [`desmoke`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    /// Estimated smoke layer `F`. Not range-limited.
    pub smoke: ImageTensor,
    /// `I - alpha * F` before clamping; `enhanced_raw + alpha * F == I`.
    pub enhanced_raw: ImageTensor,
    /// `enhanced_raw` clamped to `[0, 1]`.
    pub enhanced: ImageTensor,
    /// Per-channel weights, the channel means of `F`.
    pub alpha: [f64; CHANNELS],
    pub diag: SolveDiagnostics,
}

/// Mean of `smoke` in each channel.
pub fn compute_alpha(smoke: &ImageTensor) -> [f64; CHANNELS] {
    smoke.channel_means()
}

pub fn desmoke(image: &ImageTensor, params: &SolverParams) -> Result<DecompositionResult> {
    let kernel = build_kernel(image.height(), image.width(), params)?;
    desmoke_with_kernel(image, params, &kernel)
}

/// [`desmoke`] with a kernel shared across images of the same size.
pub fn desmoke_with_kernel(
    image: &ImageTensor,
    params: &SolverParams,
    kernel: &SpectralKernel,
) -> Result<DecompositionResult> {
    if !image.is_image_valued() {
        log::warn!("input has entries outside [0, 1]");
    }
    let (smoke, diag) = solve_smoke_with_kernel(image, params, kernel)?;
    let alpha = compute_alpha(&smoke);
    let enhanced_raw = image.sub(&smoke.scale_channels(alpha))?;
    let enhanced = enhanced_raw.clamp01();
    Ok(DecompositionResult {
        smoke,
        enhanced_raw,
        enhanced,
        alpha,
        diag,
    })
}
