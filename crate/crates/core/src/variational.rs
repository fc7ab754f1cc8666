//! The decomposition energy and its proximal building block.
//!
//! The smoke layer `F` minimises
//!
//! ```text
//! E(F) = lambda/2 * ||F - I||^2 + sum_i |(D F)_i|
//! ```
//!
//! where `(D F)_i` is the weighted 3-vector of horizontal, vertical and
//! inter-channel differences at voxel `i`.

use serde::{Deserialize, Serialize};

use crate::diffops::{apply_d, Betas};
use crate::error::{Error, Result};
use crate::tensor::{GradientStack, ImageTensor};

/// Parameters of the energy and of the alternating-direction solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Weight of the fidelity term.
    pub lambda: f64,
    pub betas: Betas,
    /// Augmented-Lagrangian penalty, fixed for the whole solve.
    pub rho: f64,
    /// Lower bound on voxel magnitudes in the shrinkage step.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Relative tolerance on primal and dual residuals.
    pub tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            betas: Betas::default(),
            rho: 5.0,
            epsilon: 1e-8,
            max_iter: 100,
            tol: 1e-4,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        positive("lambda", self.lambda)?;
        positive("rho", self.rho)?;
        positive("epsilon", self.epsilon)?;
        positive("tol", self.tol)?;
        if self.max_iter == 0 {
            return Err(Error::InvalidParams("max_iter must be at least 1".into()));
        }
        self.betas.validate()
    }
}

/// Isotropic total variation: sum over voxels of the magnitude of `D t`.
pub fn tv_norm(t: &ImageTensor, betas: &Betas) -> f64 {
    apply_d(t, betas).magnitudes().as_slice().iter().sum()
}

/// `lambda/2 * ||f - i||^2 + tv_norm(f)`.
pub fn energy(f: &ImageTensor, i: &ImageTensor, params: &SolverParams) -> Result<f64> {
    f.ensure_same_shape(i)?;
    let fidelity: f64 = f
        .as_slice()
        .iter()
        .zip(i.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(0.5 * params.lambda * fidelity + tv_norm(f, &params.betas))
}

/// Group soft-thresholding: the minimiser over `u` of
/// `sum_i |u_i| + rho/2 * ||u - v||^2`, voxel by voxel.
///
/// Each voxel's 3-vector keeps its direction and has its length reduced by
/// `1/rho`, clipping at zero. Magnitudes are floored at `epsilon` before the
/// division.
pub fn shrink(v: &GradientStack, rho: f64, epsilon: f64) -> GradientStack {
    let threshold = 1.0 / rho;
    let mut out = GradientStack::zeros_like(&v.dx);
    let (vx, vy, vc) = (v.dx.as_slice(), v.dy.as_slice(), v.dc.as_slice());
    let GradientStack { dx, dy, dc } = &mut out;
    let (ux, uy, uc) = (dx.as_mut_slice(), dy.as_mut_slice(), dc.as_mut_slice());
    for i in 0..vx.len() {
        let m = (vx[i] * vx[i] + vy[i] * vy[i] + vc[i] * vc[i]).sqrt().max(epsilon);
        let k = (m - threshold).max(0.0) / m;
        ux[i] = k * vx[i];
        uy[i] = k * vy[i];
        uc[i] = k * vc[i];
    }
    out
}
