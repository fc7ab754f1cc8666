//! Synthetic smoke for end-to-end checks with known ground truth.
//!
//! A smoke field is seeded white noise, low-passed with a Gaussian whose
//! standard deviation is the requested correlation length, rescaled to
//! `[0, strength]`, and given a small per-channel attenuation so the
//! channels differ by at most `chroma_jitter * strength`.
//!
//! Noise comes from ChaCha8 seeded through `seed_from_u64`, so a seed
//! reproduces the same field on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::gaussian_lowpass;
use crate::tensor::{ImageTensor, CHANNELS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmokeSpec {
    pub seed: u64,
    /// Peak smoke intensity, in `[0, 1]`.
    pub strength: f64,
    /// Correlation length in pixels.
    pub smoothness: f64,
    /// Maximum relative deviation between channels, in `[0, 0.1]`.
    pub chroma_jitter: f64,
}

impl Default for SmokeSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            strength: 0.3,
            smoothness: 12.0,
            chroma_jitter: 0.05,
        }
    }
}

impl SmokeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.strength) {
            return Err(Error::InvalidParams(format!(
                "smoke strength must lie in [0, 1], got {}",
                self.strength
            )));
        }
        if !(self.smoothness.is_finite() && self.smoothness > 0.0) {
            return Err(Error::InvalidParams(format!(
                "smoothness must be positive, got {}",
                self.smoothness
            )));
        }
        if !(0.0..=0.1).contains(&self.chroma_jitter) {
            return Err(Error::InvalidParams(format!(
                "chroma jitter must lie in [0, 0.1], got {}",
                self.chroma_jitter
            )));
        }
        Ok(())
    }
}

pub fn generate_smoke_field(height: usize, width: usize, spec: &SmokeSpec) -> Result<ImageTensor> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noise = ImageTensor::zeros(height, width)?;
    for px in noise.as_mut_slice().chunks_exact_mut(CHANNELS) {
        let v: f64 = rng.random();
        px.fill(v);
    }
    let jitter: [f64; CHANNELS] = std::array::from_fn(|_| rng.random::<f64>() * spec.chroma_jitter);

    let smooth = gaussian_lowpass(&noise, spec.smoothness)?;
    // channels of `smooth` are identical; normalise on channel 0
    let base: Vec<f64> = smooth.as_slice().iter().step_by(CHANNELS).copied().collect();
    let (lo, hi) = base
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let range = hi - lo;

    let mut field = ImageTensor::zeros(height, width)?;
    for (px, &b) in field.as_mut_slice().chunks_exact_mut(CHANNELS).zip(&base) {
        let level = if range > f64::EPSILON { (b - lo) / range } else { 1.0 };
        for (v, j) in px.iter_mut().zip(jitter) {
            *v = spec.strength * level * (1.0 - j);
        }
    }
    Ok(field)
}

/// `clamp01(clean + field)`.
pub fn apply_smoke(clean: &ImageTensor, field: &ImageTensor) -> Result<ImageTensor> {
    Ok(clean.add(field)?.clamp01())
}
