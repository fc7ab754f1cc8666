//! Test-only helpers shared by the integration suites: an independent
//! minimiser of the smoke energy and procedurally textured clean images.
#![allow(dead_code)]

use desmoke_core::{Betas, ImageTensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimises `lambda/2 ||F - I||^2 + sum_i |(D F)_i|` by accelerated
/// projected gradient on the dual, `F = I - D^T p / lambda` with
/// `|p_i| <= 1`. Operators are written out with explicit indices and share
/// no code with the library.
pub struct DualOracle {
    pub smoke: Vec<f64>,
    pub primal: f64,
    pub dual: f64,
    pub iterations: usize,
}

impl DualOracle {
    pub fn gap(&self) -> f64 {
        self.primal - self.dual
    }
}

struct Grid {
    h: usize,
    w: usize,
    b: [f64; 3],
}

impl Grid {
    fn at(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.w + x) * 3 + c
    }

    // p[3 * i + d] holds direction d of voxel i
    fn grad(&self, f: &[f64], out: &mut [f64]) {
        for y in 0..self.h {
            for x in 0..self.w {
                for c in 0..3 {
                    let i = self.at(y, x, c);
                    out[3 * i] = self.b[0] * (f[self.at(y, (x + 1) % self.w, c)] - f[i]);
                    out[3 * i + 1] = self.b[1] * (f[self.at((y + 1) % self.h, x, c)] - f[i]);
                    out[3 * i + 2] = self.b[2] * (f[self.at(y, x, (c + 1) % 3)] - f[i]);
                }
            }
        }
    }

    // adjoint of grad
    fn grad_t(&self, p: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for y in 0..self.h {
            for x in 0..self.w {
                for c in 0..3 {
                    let i = self.at(y, x, c);
                    let nx = self.at(y, (x + 1) % self.w, c);
                    let ny = self.at((y + 1) % self.h, x, c);
                    let nc = self.at(y, x, (c + 1) % 3);
                    out[nx] += self.b[0] * p[3 * i];
                    out[i] -= self.b[0] * p[3 * i];
                    out[ny] += self.b[1] * p[3 * i + 1];
                    out[i] -= self.b[1] * p[3 * i + 1];
                    out[nc] += self.b[2] * p[3 * i + 2];
                    out[i] -= self.b[2] * p[3 * i + 2];
                }
            }
        }
    }

    fn primal(&self, f: &[f64], img: &[f64], lambda: f64, scratch: &mut [f64]) -> f64 {
        self.grad(f, scratch);
        let fid: f64 = f.iter().zip(img).map(|(a, b)| (a - b) * (a - b)).sum();
        let tv: f64 = scratch
            .chunks_exact(3)
            .map(|g| (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt())
            .sum();
        0.5 * lambda * fid + tv
    }
}

/// Runs until the duality gap falls below `rel_gap * primal` or
/// `max_iter` iterations.
pub fn dual_oracle(
    image: &ImageTensor,
    lambda: f64,
    betas: Betas,
    rel_gap: f64,
    max_iter: usize,
) -> DualOracle {
    let (h, w) = image.shape();
    let grid = Grid {
        h,
        w,
        b: [betas.x, betas.y, betas.c],
    };
    let img = image.as_slice();
    let n = img.len();
    // ||D D^T|| <= 4 (bx^2 + by^2 + bc^2)
    let lip = 4.0 * (betas.x.powi(2) + betas.y.powi(2) + betas.c.powi(2)) / lambda;
    let step = 1.0 / lip;

    let mut p = vec![0.0; 3 * n];
    let mut q = p.clone();
    let mut t = 1.0f64;
    let mut dtp = vec![0.0; n];
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; 3 * n];
    let mut best = DualOracle {
        smoke: img.to_vec(),
        primal: f64::INFINITY,
        dual: f64::NEG_INFINITY,
        iterations: 0,
    };
    let norm_i2: f64 = img.iter().map(|v| v * v).sum();
    let dual_value = |p: &[f64], dtp: &mut [f64]| {
        grid.grad_t(p, dtp);
        let r: f64 = img
            .iter()
            .zip(dtp.iter())
            .map(|(i, d)| (lambda * i - d).powi(2))
            .sum();
        0.5 * lambda * norm_i2 - r / (2.0 * lambda)
    };

    for k in 1..=max_iter {
        // gradient of the dual objective at q is -D F(q)
        grid.grad_t(&q, &mut dtp);
        for j in 0..n {
            f[j] = img[j] - dtp[j] / lambda;
        }
        grid.grad(&f, &mut g);
        let mut p_next = q.clone();
        for (v, (pn, gi)) in p_next.chunks_exact_mut(3).zip(g.chunks_exact(3)).enumerate() {
            let _ = v;
            for d in 0..3 {
                pn[d] += step * gi[d];
            }
            let m = (pn[0] * pn[0] + pn[1] * pn[1] + pn[2] * pn[2]).sqrt();
            if m > 1.0 {
                pn.iter_mut().for_each(|a| *a /= m);
            }
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        for j in 0..q.len() {
            q[j] = p_next[j] + (t - 1.0) / t_next * (p_next[j] - p[j]);
        }
        p = p_next;
        t = t_next;

        if k % 50 == 0 || k == max_iter {
            let dual = dual_value(&p, &mut dtp);
            for j in 0..n {
                f[j] = img[j] - dtp[j] / lambda;
            }
            let primal = grid.primal(&f, img, lambda, &mut g);
            if primal < best.primal {
                best.primal = primal;
                best.smoke = f.clone();
            }
            best.dual = best.dual.max(dual);
            best.iterations = k;
            if best.primal - best.dual <= rel_gap * best.primal {
                break;
            }
        }
    }
    best
}

/// Clean test scene: a tissue-like base colour with oriented gratings,
/// blobs and a few sharp vessels. Values stay inside `[0.02, 0.75]`.
pub fn textured_image(h: usize, w: usize, seed: u64) -> ImageTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = [
        rng.random_range(0.40..0.55),
        rng.random_range(0.15..0.25),
        rng.random_range(0.12..0.22),
    ];
    let gratings: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            let period = rng.random_range(4.0..14.0);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let amp = rng.random_range(0.03..0.08);
            (angle, period, phase, amp)
        })
        .collect();
    let blobs: Vec<(f64, f64, f64, f64)> = (0..12)
        .map(|_| {
            (
                rng.random_range(0.0..h as f64),
                rng.random_range(0.0..w as f64),
                rng.random_range(3.0..12.0),
                rng.random_range(-0.15..0.15),
            )
        })
        .collect();
    let vessels: Vec<(f64, f64, f64)> = (0..5)
        .map(|_| {
            (
                rng.random_range(0.0..std::f64::consts::PI),
                rng.random_range(0.0..(h.max(w) as f64)),
                rng.random_range(1.0..2.5),
            )
        })
        .collect();
    let tint = [1.0, 0.55, 0.5];
    ImageTensor::from_fn(h, w, |y, x, c| {
        let (yf, xf) = (y as f64, x as f64);
        let mut v = 0.0;
        for &(a, p, ph, amp) in &gratings {
            let s = xf * a.cos() + yf * a.sin();
            v += amp * (std::f64::consts::TAU * s / p + ph).sin();
        }
        for &(cy, cx, r, amp) in &blobs {
            let d2 = (yf - cy).powi(2) + (xf - cx).powi(2);
            v += amp * (-d2 / (2.0 * r * r)).exp();
        }
        let mut dark = 0.0f64;
        for &(a, off, width) in &vessels {
            let s = xf * a.cos() + yf * a.sin() - off * 0.5;
            if s.abs() < width {
                dark = 0.5;
            }
        }
        let val = (base[c] + tint[c] * v) * (1.0 - dark);
        val.clamp(0.02, 0.75)
    })
    .unwrap()
}
