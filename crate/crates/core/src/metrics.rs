//! Evaluation metrics: restored visible edges, PSNR and RMS contrast.
//!
//! Edge visibility uses a local Michelson contrast on the luminance
//! `(R + G + B) / 3`: a pixel is a visible edge if, against at least one of
//! its in-image 4-neighbours, `|a - b| / (a + b)` exceeds the threshold
//! (5 % by default). This is an approximation of blind-contrast edge
//! visibility estimators; values are comparable between methods run through
//! this crate, not against external tables.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tensor::{ImageTensor, CHANNELS};

pub const DEFAULT_CONTRAST_THRESHOLD: f64 = 0.05;

/// Per-pixel `(R + G + B) / 3`, row-major.
pub fn luminance(t: &ImageTensor) -> Vec<f64> {
    t.as_slice()
        .chunks_exact(CHANNELS)
        .map(|px| px.iter().sum::<f64>() / CHANNELS as f64)
        .collect()
}

#[inline]
fn michelson(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s <= 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Binary per-pixel mask of visible edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMask {
    pub height: usize,
    pub width: usize,
    pub mask: Vec<bool>,
}

impl EdgeMask {
    pub fn get(&self, y: usize, x: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

pub fn visible_edges(t: &ImageTensor, contrast_threshold: f64) -> Result<EdgeMask> {
    if !(contrast_threshold > 0.0 && contrast_threshold < 1.0) {
        return Err(Error::InvalidParams(format!(
            "contrast threshold must lie in (0, 1), got {contrast_threshold}"
        )));
    }
    let (h, w) = t.shape();
    let lum = luminance(t);
    let mut mask = vec![false; h * w];
    // each neighbour pair is visited once and marks both ends
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w && michelson(lum[i], lum[i + 1]) > contrast_threshold {
                mask[i] = true;
                mask[i + 1] = true;
            }
            if y + 1 < h && michelson(lum[i], lum[i + w]) > contrast_threshold {
                mask[i] = true;
                mask[i + w] = true;
            }
        }
    }
    Ok(EdgeMask {
        height: h,
        width: w,
        mask,
    })
}

/// Relative change in the number of visible-edge pixels from `original` to
/// `enhanced`: `(n_J - n_I) / max(n_I, 1)`. Positive when edges were
/// restored.
pub fn re_metric(original: &ImageTensor, enhanced: &ImageTensor) -> Result<f64> {
    re_metric_with_threshold(original, enhanced, DEFAULT_CONTRAST_THRESHOLD)
}

pub fn re_metric_with_threshold(
    original: &ImageTensor,
    enhanced: &ImageTensor,
    contrast_threshold: f64,
) -> Result<f64> {
    original.ensure_same_shape(enhanced)?;
    let n_i = visible_edges(original, contrast_threshold)?.count();
    let n_j = visible_edges(enhanced, contrast_threshold)?.count();
    Ok((n_j as f64 - n_i as f64) / n_i.max(1) as f64)
}

/// Peak signal-to-noise ratio with peak 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Db(f64),
    /// Mean squared error is exactly zero.
    Identical,
}

impl Psnr {
    pub fn db(self) -> Option<f64> {
        match self {
            Psnr::Db(v) => Some(v),
            Psnr::Identical => None,
        }
    }

    /// Orders `Identical` above any finite value.
    pub fn as_f64(self) -> f64 {
        self.db().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Db(v) => write!(f, "{v:.4} dB"),
            Psnr::Identical => f.write_str("identical"),
        }
    }
}

impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Psnr::Db(v) => s.serialize_f64(*v),
            Psnr::Identical => s.serialize_str("identical"),
        }
    }
}

pub fn mse(a: &ImageTensor, b: &ImageTensor) -> Result<f64> {
    a.ensure_same_shape(b)?;
    let sum: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.len() as f64)
}

pub fn psnr(a: &ImageTensor, b: &ImageTensor) -> Result<Psnr> {
    let m = mse(a, b)?;
    Ok(if m == 0.0 {
        Psnr::Identical
    } else {
        Psnr::Db(-10.0 * m.log10())
    })
}

/// Standard deviation of the luminance.
pub fn rms_contrast(t: &ImageTensor) -> f64 {
    let lum = luminance(t);
    let n = lum.len() as f64;
    let mean = lum.iter().sum::<f64>() / n;
    (lum.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / n).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub re: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psnr: Option<Psnr>,
    pub rms_contrast_in: f64,
    pub rms_contrast_out: f64,
}

impl MetricReport {
    /// Compares `enhanced` against `original`; PSNR of `enhanced` is taken
    /// against `truth` when one is supplied.
    pub fn evaluate(
        original: &ImageTensor,
        enhanced: &ImageTensor,
        truth: Option<&ImageTensor>,
    ) -> Result<Self> {
        Ok(Self {
            re: re_metric(original, enhanced)?,
            psnr: truth.map(|t| psnr(enhanced, t)).transpose()?,
            rms_contrast_in: rms_contrast(original),
            rms_contrast_out: rms_contrast(enhanced),
        })
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<18} {:>14.6}", "re", self.re)?;
        if let Some(p) = self.psnr {
            writeln!(f, "{:<18} {:>14}", "psnr", p.to_string())?;
        }
        writeln!(f, "{:<18} {:>14.6}", "rms_contrast_in", self.rms_contrast_in)?;
        write!(f, "{:<18} {:>14.6}", "rms_contrast_out", self.rms_contrast_out)
    }
}
