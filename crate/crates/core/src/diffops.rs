//! Periodic forward differences along the two spatial axes and the channel
//! axis, their adjoints, and the weighted stacked operator `D`.
//!
//! All three axes wrap around, including the length-3 channel axis, so every
//! operator here is circulant and is diagonalised by the 3-D DFT in
//! [`crate::spectral`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{GradientStack, ImageTensor, CHANNELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Horizontal (column index).
    X,
    /// Vertical (row index).
    Y,
    /// Colour channel.
    C,
}

/// Weights applied to the horizontal, vertical and inter-channel
/// differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Betas {
    pub x: f64,
    pub y: f64,
    pub c: f64,
}

impl Betas {
    pub fn new(x: f64, y: f64, c: f64) -> Result<Self> {
        let b = Self { x, y, c };
        b.validate()?;
        Ok(b)
    }

    pub fn uniform(v: f64) -> Result<Self> {
        Self::new(v, v, v)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.x, self.y, self.c];
        if all.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidParams(format!(
                "difference weights must be finite and nonnegative, got {all:?}"
            )));
        }
        if all.iter().all(|&b| b == 0.0) {
            return Err(Error::InvalidParams(
                "at least one difference weight must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::C => self.c,
        }
    }
}

impl Default for Betas {
    fn default() -> Self {
        Self {
            x: 1.0,
            y: 1.0,
            c: 1.0,
        }
    }
}

/// `out[p] = t[p + e_axis] - t[p]` with periodic wrap.
pub fn forward_diff(t: &ImageTensor, axis: Axis) -> ImageTensor {
    shifted_diff(t, axis, 1)
}

/// Exact adjoint of [`forward_diff`]: `out[p] = t[p - e_axis] - t[p]`.
pub fn adjoint_diff(t: &ImageTensor, axis: Axis) -> ImageTensor {
    shifted_diff(t, axis, -1)
}

// out[p] = t[p + step * e_axis] - t[p], step = +-1
fn shifted_diff(t: &ImageTensor, axis: Axis, step: isize) -> ImageTensor {
    let (h, w) = t.shape();
    let src = t.as_slice();
    let mut out = t.zeros_like();
    let dst = out.as_mut_slice();
    let wrap = |i: usize, n: usize| ((i as isize + step).rem_euclid(n as isize)) as usize;
    match axis {
        Axis::X => {
            for y in 0..h {
                for x in 0..w {
                    let here = (y * w + x) * CHANNELS;
                    let there = (y * w + wrap(x, w)) * CHANNELS;
                    for c in 0..CHANNELS {
                        dst[here + c] = src[there + c] - src[here + c];
                    }
                }
            }
        }
        Axis::Y => {
            let row = w * CHANNELS;
            for y in 0..h {
                let here = y * row;
                let there = wrap(y, h) * row;
                for i in 0..row {
                    dst[here + i] = src[there + i] - src[here + i];
                }
            }
        }
        Axis::C => {
            for (o, px) in dst.chunks_exact_mut(CHANNELS).zip(src.chunks_exact(CHANNELS)) {
                for c in 0..CHANNELS {
                    o[c] = px[wrap(c, CHANNELS)] - px[c];
                }
            }
        }
    }
    out
}

/// `D t = (beta_x Dx t, beta_y Dy t, beta_c Dc t)`.
pub fn apply_d(t: &ImageTensor, betas: &Betas) -> GradientStack {
    GradientStack {
        dx: forward_diff(t, Axis::X).scale(betas.x),
        dy: forward_diff(t, Axis::Y).scale(betas.y),
        dc: forward_diff(t, Axis::C).scale(betas.c),
    }
}

/// `D^T g = beta_x Dx^T g.dx + beta_y Dy^T g.dy + beta_c Dc^T g.dc`.
pub fn apply_dt(g: &GradientStack, betas: &Betas) -> ImageTensor {
    let mut out = adjoint_diff(&g.dx, Axis::X).scale(betas.x);
    out.axpy(betas.y, &adjoint_diff(&g.dy, Axis::Y))
        .expect("stack fields share a shape");
    out.axpy(betas.c, &adjoint_diff(&g.dc, Axis::C))
        .expect("stack fields share a shape");
    out
}
