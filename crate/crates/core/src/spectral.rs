//! 3-D discrete Fourier transforms over `H x W x 3` grids and the
//! closed-form smoke-layer update.
//!
//! Because every difference operator wraps periodically, `D^T D` is
//! circulant and the linear system of the `F` sub-problem,
//!
//! ```text
//! (lambda Id + rho D^T D) F = lambda I + rho D^T u - D^T y
//! ```
//!
//! becomes a per-frequency division by a real, strictly positive
//! denominator. The forward transform is unnormalised; the inverse carries
//! the `1 / (H W 3)` factor.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::diffops::{apply_dt, Betas};
use crate::error::{Error, Result};
use crate::tensor::{GradientStack, ImageTensor, CHANNELS};
use crate::variational::SolverParams;

/// Complex spectrum of an `H x W x 3` tensor, same memory layout as
/// [`ImageTensor`]: index `(ky * W + kx) * 3 + kc`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, ky: usize, kx: usize, kc: usize) -> Complex64 {
        self.data[(ky * self.width + kx) * CHANNELS + kc]
    }
}

/// Forward and inverse 1-D plans for the three axes of one grid size.
#[derive(Clone)]
pub struct Fft3Plan {
    height: usize,
    width: usize,
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl fmt::Debug for Fft3Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft3Plan")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish_non_exhaustive()
    }
}

impl Fft3Plan {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height < 2 || width < 2 {
            return Err(Error::DimensionTooSmall { height, width });
        }
        let mut planner = FftPlanner::new();
        // axis order: y, x, c
        let forward = [
            planner.plan_fft_forward(height),
            planner.plan_fft_forward(width),
            planner.plan_fft_forward(CHANNELS),
        ];
        let inverse = [
            planner.plan_fft_inverse(height),
            planner.plan_fft_inverse(width),
            planner.plan_fft_inverse(CHANNELS),
        ];
        Ok(Self {
            height,
            width,
            forward,
            inverse,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn check(&self, shape: (usize, usize)) -> Result<()> {
        if shape != self.shape() {
            return Err(Error::ShapeMismatch {
                left: shape,
                right: self.shape(),
            });
        }
        Ok(())
    }

    /// Unnormalised forward transform of a real tensor.
    pub fn forward(&self, t: &ImageTensor) -> Result<Spectrum> {
        self.check(t.shape())?;
        let mut data: Vec<Complex64> = t
            .as_slice()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.transform(&mut data, &self.forward);
        Ok(Spectrum {
            height: self.height,
            width: self.width,
            data,
        })
    }

    /// Inverse transform scaled by `1 / (H W 3)`; the imaginary part is
    /// dropped.
    pub fn inverse(&self, s: &Spectrum) -> Result<ImageTensor> {
        let mut data = s.data.clone();
        self.inverse_in_place(s.shape(), &mut data)
    }

    fn inverse_in_place(
        &self,
        shape: (usize, usize),
        data: &mut [Complex64],
    ) -> Result<ImageTensor> {
        self.check(shape)?;
        self.transform(data, &self.inverse);
        let n = data.len() as f64;
        ImageTensor::from_vec(
            self.height,
            self.width,
            data.iter().map(|z| z.re / n).collect(),
        )
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let (h, w) = (self.height, self.width);
        let mut lines = vec![Complex64::default(); data.len()];
        // channel axis is contiguous
        plans[2].process(data);
        along_axis(data, &mut lines, w, CHANNELS, &*plans[1]);
        along_axis(data, &mut lines, h, w * CHANNELS, &*plans[0]);
    }
}

// Runs `fft` over every line of length `len` whose elements sit `stride`
// apart, by gathering all such lines into contiguous storage.
fn along_axis(
    data: &mut [Complex64],
    lines: &mut [Complex64],
    len: usize,
    stride: usize,
    fft: &dyn Fft<f64>,
) {
    let block = len * stride;
    let mut k = 0;
    for base in (0..data.len()).step_by(block) {
        for s in 0..stride {
            for i in 0..len {
                lines[k] = data[base + s + i * stride];
                k += 1;
            }
        }
    }
    fft.process(lines);
    k = 0;
    for base in (0..data.len()).step_by(block) {
        for s in 0..stride {
            for i in 0..len {
                data[base + s + i * stride] = lines[k];
                k += 1;
            }
        }
    }
}

/// Unnormalised forward 3-D DFT.
pub fn fft3(t: &ImageTensor) -> Result<Spectrum> {
    Fft3Plan::new(t.height(), t.width())?.forward(t)
}

/// Inverse 3-D DFT (normalised by `1 / (H W 3)`), real part.
pub fn ifft3(s: &Spectrum) -> Result<ImageTensor> {
    Fft3Plan::new(s.height, s.width)?.inverse(s)
}

/// `|F[D_d]|^2` at bin `k` of an axis of length `n`, for the periodic
/// forward difference: `|e^{2 pi i k/n} - 1|^2 = 4 sin^2(pi k / n)`.
#[inline]
pub fn diff_symbol(k: usize, n: usize) -> f64 {
    let s = (PI * k as f64 / n as f64).sin();
    4.0 * s * s
}

/// Identity of the parameters a kernel was built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelKey {
    pub height: usize,
    pub width: usize,
    pub lambda: f64,
    pub rho: f64,
    pub betas: Betas,
}

impl KernelKey {
    pub fn new(height: usize, width: usize, params: &SolverParams) -> Self {
        Self {
            height,
            width,
            lambda: params.lambda,
            rho: params.rho,
            betas: params.betas,
        }
    }
}

/// Per-frequency denominator
/// `lambda + rho (bx^2 |F[Dx]|^2 + by^2 |F[Dy]|^2 + bc^2 |F[Dc]|^2)`,
/// plus the transform plans for its grid size. Immutable once built.
#[derive(Debug, Clone)]
pub struct SpectralKernel {
    key: KernelKey,
    denom: Vec<f64>,
    plan: Fft3Plan,
}

/// Precomputes the denominator of the `F` update.
pub fn build_kernel(height: usize, width: usize, params: &SolverParams) -> Result<SpectralKernel> {
    params.validate()?;
    let plan = Fft3Plan::new(height, width)?;
    let SolverParams {
        lambda, rho, betas, ..
    } = *params;
    let sx: Vec<f64> = (0..width).map(|k| diff_symbol(k, width)).collect();
    let sy: Vec<f64> = (0..height).map(|k| diff_symbol(k, height)).collect();
    let sc: Vec<f64> = (0..CHANNELS).map(|k| diff_symbol(k, CHANNELS)).collect();
    let (bx2, by2, bc2) = (betas.x * betas.x, betas.y * betas.y, betas.c * betas.c);
    let mut denom = Vec::with_capacity(height * width * CHANNELS);
    for ky in 0..height {
        for kx in 0..width {
            for kc in 0..CHANNELS {
                denom.push(lambda + rho * (bx2 * sx[kx] + by2 * sy[ky] + bc2 * sc[kc]));
            }
        }
    }
    Ok(SpectralKernel {
        key: KernelKey::new(height, width, params),
        denom,
        plan,
    })
}

impl SpectralKernel {
    pub fn key(&self) -> &KernelKey {
        &self.key
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.key.height, self.key.width)
    }

    /// Denominator values in tensor layout.
    pub fn denom(&self) -> &[f64] {
        &self.denom
    }

    pub fn plan(&self) -> &Fft3Plan {
        &self.plan
    }

    pub fn matches(&self, shape: (usize, usize), params: &SolverParams) -> bool {
        self.key == KernelKey::new(shape.0, shape.1, params)
    }
}

/// Exact minimiser of the `F` sub-problem,
/// `argmin_F lambda/2 ||F - I||^2 + <y, DF - u> + rho/2 ||DF - u||^2`.
pub fn f_update(
    image: &ImageTensor,
    u: &GradientStack,
    y: &GradientStack,
    kernel: &SpectralKernel,
    params: &SolverParams,
) -> Result<ImageTensor> {
    if !kernel.matches(image.shape(), params) {
        return Err(Error::KernelMismatch);
    }
    for s in [u, y] {
        image.ensure_same_shape(&s.dx)?;
    }
    let combined = u.combine(params.rho, y, -1.0)?;
    let mut rhs = apply_dt(&combined, &params.betas);
    rhs.axpy(params.lambda, image)?;

    let mut spec = kernel.plan.forward(&rhs)?;
    for (z, d) in spec.data.iter_mut().zip(&kernel.denom) {
        *z /= *d;
    }
    kernel.plan.inverse_in_place(image.shape(), &mut spec.data)
}

/// Gaussian low-pass over the two spatial axes with standard deviation
/// `sigma` pixels, applied as a Fourier-domain attenuation. Channels are
/// filtered independently.
pub fn gaussian_lowpass(t: &ImageTensor, sigma: f64) -> Result<ImageTensor> {
    let (h, w) = t.shape();
    let plan = Fft3Plan::new(h, w)?;
    let mut spec = plan.forward(t)?;
    let signed = |k: usize, n: usize| {
        let k = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        k / n as f64
    };
    let c = -2.0 * PI * PI * sigma * sigma;
    for ky in 0..h {
        let fy = signed(ky, h);
        for kx in 0..w {
            let fx = signed(kx, w);
            let g = (c * (fx * fx + fy * fy)).exp();
            let base = (ky * w + kx) * CHANNELS;
            for z in &mut spec.data[base..base + CHANNELS] {
                *z *= g;
            }
        }
    }
    plan.inverse_in_place((h, w), &mut spec.data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::apply_d;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(h: usize, w: usize, rng: &mut ChaCha8Rng) -> ImageTensor {
        ImageTensor::from_fn(h, w, |_, _, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    fn random_stack(h: usize, w: usize, rng: &mut ChaCha8Rng) -> GradientStack {
        GradientStack::new(random(h, w, rng), random(h, w, rng), random(h, w, rng)).unwrap()
    }

    // Naive O(N^2) DFT straight from the definition.
    fn naive_dft(t: &ImageTensor) -> Vec<Complex64> {
        let (h, w) = t.shape();
        let mut out = Vec::new();
        for ky in 0..h {
            for kx in 0..w {
                for kc in 0..3 {
                    let mut acc = Complex64::default();
                    for y in 0..h {
                        for x in 0..w {
                            for c in 0..3 {
                                let ph = -2.0
                                    * PI
                                    * ((ky * y) as f64 / h as f64
                                        + (kx * x) as f64 / w as f64
                                        + (kc * c) as f64 / 3.0);
                                acc += Complex64::from_polar(t.get(y, x, c), ph);
                            }
                        }
                    }
                    out.push(acc);
                }
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft_non_power_of_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (h, w) in [(3, 5), (4, 4), (6, 7)] {
            let t = random(h, w, &mut rng);
            let s = fft3(&t).unwrap();
            for (a, b) in s.as_slice().iter().zip(naive_dft(&t)) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn delta_gives_flat_spectrum() {
        let mut t = ImageTensor::zeros(4, 6).unwrap();
        t[(0, 0, 0)] = 1.0;
        let s = fft3(&t).unwrap();
        for z in s.as_slice() {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_is_dc_only() {
        let t = ImageTensor::new(5, 3, 0.25).unwrap();
        let s = fft3(&t).unwrap();
        assert!((s.get(0, 0, 0).re - 0.25 * 45.0).abs() < 1e-12);
        for z in &s.as_slice()[1..] {
            assert!(z.norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = random(7, 10, &mut rng);
        let s = fft3(&t).unwrap();
        let back = ifft3(&s).unwrap();
        assert!(back.sub(&t).unwrap().max_abs() < 1e-12);
        let energy_freq: f64 = s.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() / t.len() as f64;
        assert!((energy_freq - t.dot(&t).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn kernel_values() {
        let p = SolverParams::default();
        let k = build_kernel(3, 4, &p).unwrap();
        assert_eq!(k.denom()[0], 1.0);
        // kx = 2 is the Nyquist bin of W = 4
        let idx = 2 * CHANNELS;
        assert!((k.denom()[idx] - 21.0).abs() < 1e-12);
        assert!(k.denom().iter().all(|&d| d >= p.lambda));

        let tiny = SolverParams {
            rho: 1e-12,
            ..p
        };
        let k = build_kernel(5, 5, &tiny).unwrap();
        assert!(k.denom().iter().all(|&d| (d - 1.0).abs() < 1e-10));
        assert!(build_kernel(1, 5, &p).is_err());
    }

    #[test]
    fn kernel_diagonalises_dtd() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let p = SolverParams {
            betas: Betas::new(0.5, 1.5, 2.0).unwrap(),
            rho: 3.0,
            lambda: 0.7,
            ..Default::default()
        };
        let t = random(5, 6, &mut rng);
        let k = build_kernel(5, 6, &p).unwrap();
        let lhs = fft3(&apply_dt(&apply_d(&t, &p.betas), &p.betas)).unwrap();
        let rhs = fft3(&t).unwrap();
        let scale = rhs.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
        for ((a, b), d) in lhs.as_slice().iter().zip(rhs.as_slice()).zip(k.denom()) {
            let want = b * ((d - p.lambda) / p.rho);
            assert!((a - want).norm() <= 1e-9 * scale);
        }
    }

    fn dense_dtd(h: usize, w: usize, betas: &Betas) -> DMatrix<f64> {
        let n = h * w * 3;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = apply_dt(&apply_d(&ImageTensor::from_vec(h, w, e).unwrap(), betas), betas);
            m.set_column(j, &DVector::from_column_slice(col.as_slice()));
        }
        m
    }

    #[test]
    fn f_update_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let p = SolverParams::default();
        let k = build_kernel(4, 4, &p).unwrap();
        let a = DMatrix::identity(48, 48) * p.lambda + dense_dtd(4, 4, &p.betas) * p.rho;
        let lu = a.lu();
        for _ in 0..5 {
            let i = random(4, 4, &mut rng);
            let u = random_stack(4, 4, &mut rng);
            let y = random_stack(4, 4, &mut rng);
            let f = f_update(&i, &u, &y, &k, &p).unwrap();
            let rhs = apply_dt(&u.combine(p.rho, &y, -1.0).unwrap(), &p.betas)
                .add(&i.scale(p.lambda))
                .unwrap();
            let x = lu.solve(&DVector::from_column_slice(rhs.as_slice())).unwrap();
            let err = f.as_slice().iter().zip(x.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(err <= 1e-8 * x.norm());
        }
    }

    #[test]
    fn f_update_stationarity_and_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let p = SolverParams::default();
        let (h, w) = (6, 5);
        let k = build_kernel(h, w, &p).unwrap();
        let i = random(h, w, &mut rng);
        let u = random_stack(h, w, &mut rng);
        let y = random_stack(h, w, &mut rng);
        let f = f_update(&i, &u, &y, &k, &p).unwrap();
        // lambda (F - I) + D^T y + rho D^T (D F - u)
        let df_u = apply_d(&f, &p.betas).sub(&u).unwrap();
        let mut g = f.sub(&i).unwrap().scale(p.lambda);
        g.axpy(1.0, &apply_dt(&y, &p.betas)).unwrap();
        g.axpy(p.rho, &apply_dt(&df_u, &p.betas)).unwrap();
        assert!(g.norm() <= 1e-8 * i.scale(p.lambda).norm());

        let target = random(h, w, &mut rng);
        let u = apply_d(&target, &p.betas);
        let zero = GradientStack::zeros_like(&target);
        let f = f_update(&target, &u, &zero, &k, &p).unwrap();
        assert!(f.sub(&target).unwrap().max_abs() < 1e-12);

        let c = ImageTensor::new(h, w, 0.37).unwrap();
        let f = f_update(&c, &zero, &zero, &k, &p).unwrap();
        assert!(f.sub(&c).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn f_update_rejects_foreign_kernel() {
        let p = SolverParams::default();
        let k = build_kernel(4, 4, &p).unwrap();
        let i = ImageTensor::zeros(4, 5).unwrap();
        let z = GradientStack::zeros_like(&i);
        assert!(matches!(f_update(&i, &z, &z, &k, &p), Err(Error::KernelMismatch)));
        let i = ImageTensor::zeros(4, 4).unwrap();
        let z = GradientStack::zeros_like(&i);
        let other = SolverParams { rho: 2.0, ..p };
        assert!(matches!(f_update(&i, &z, &z, &k, &other), Err(Error::KernelMismatch)));
    }

    #[test]
    fn lowpass_preserves_mean_and_smooths() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let t = random(16, 12, &mut rng);
        let s = gaussian_lowpass(&t, 3.0).unwrap();
        let m0 = t.channel_means();
        let m1 = s.channel_means();
        for c in 0..3 {
            assert!((m0[c] - m1[c]).abs() < 1e-12);
        }
        let b = Betas::default();
        assert!(crate::variational::tv_norm(&s, &b) < crate::variational::tv_norm(&t, &b));
    }
}
