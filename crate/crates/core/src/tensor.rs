//! Dense `H x W x 3` real tensors.
//!
//! Storage is row-major with the channel index fastest: the sample at row
//! `y`, column `x`, channel `c` lives at `(y * width + x) * 3 + c`. Every
//! other module (difference operators, transforms, image I/O) assumes this
//! layout.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Number of colour channels. Fixed.
pub const CHANNELS: usize = 3;

/// An `H x W x 3` grid of `f64` intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

fn check_dims(height: usize, width: usize) -> Result<()> {
    if height < 2 || width < 2 {
        return Err(Error::DimensionTooSmall { height, width });
    }
    Ok(())
}

impl ImageTensor {
    /// Tensor with every entry equal to `fill`.
    pub fn new(height: usize, width: usize, fill: f64) -> Result<Self> {
        check_dims(height, width)?;
        Ok(Self {
            height,
            width,
            data: vec![fill; height * width * CHANNELS],
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, 0.0)
    }

    /// Wraps an existing buffer laid out as described in the module docs.
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(height, width)?;
        if data.len() != height * width * CHANNELS {
            return Err(Error::DataLength {
                height,
                width,
                got: data.len(),
            });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Builds a tensor from `f(y, x, c)`.
    pub fn from_fn<F>(height: usize, width: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> f64,
    {
        check_dims(height, width)?;
        let mut data = Vec::with_capacity(height * width * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                for c in 0..CHANNELS {
                    data.push(f(y, x, c));
                }
            }
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Same shape as `self`, all zeros.
    pub fn zeros_like(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: vec![0.0; self.data.len()],
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// `(height, width)`; the channel count is always [`CHANNELS`].
    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index_of(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * CHANNELS + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[self.index_of(y, x, c)]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    /// Element-wise `f(a, b)` over two tensors of equal shape.
    pub fn zip_map<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
    {
        self.ensure_same_shape(other)?;
        Ok(Self {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(f64) -> f64,
    {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&a| f(a)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|a| a * s)
    }

    /// `self += s * other`, in place.
    pub fn axpy(&mut self, s: f64, other: &Self) -> Result<()> {
        self.ensure_same_shape(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        Ok(())
    }

    /// Sum of element-wise products.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.ensure_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    /// Euclidean norm over all entries.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Clamps every entry into `[0, 1]`.
    pub fn clamp01(&self) -> Self {
        self.map(|a| a.clamp(0.0, 1.0))
    }

    /// True if every entry lies in `[0, 1]`.
    pub fn is_image_valued(&self) -> bool {
        self.data.iter().all(|a| (0.0..=1.0).contains(a))
    }

    /// Arithmetic mean of each channel.
    pub fn channel_means(&self) -> [f64; CHANNELS] {
        let mut sums = [0.0; CHANNELS];
        for px in self.data.chunks_exact(CHANNELS) {
            for (s, v) in sums.iter_mut().zip(px) {
                *s += v;
            }
        }
        let n = (self.height * self.width) as f64;
        sums.map(|s| s / n)
    }

    /// Multiplies channel `c` by `weights[c]`.
    pub fn scale_channels(&self, weights: [f64; CHANNELS]) -> Self {
        let mut out = self.clone();
        for px in out.data.chunks_exact_mut(CHANNELS) {
            for (v, w) in px.iter_mut().zip(weights) {
                *v *= w;
            }
        }
        out
    }
}

impl Index<(usize, usize, usize)> for ImageTensor {
    type Output = f64;

    #[inline]
    fn index(&self, (y, x, c): (usize, usize, usize)) -> &f64 {
        &self.data[self.index_of(y, x, c)]
    }
}

impl IndexMut<(usize, usize, usize)> for ImageTensor {
    #[inline]
    fn index_mut(&mut self, (y, x, c): (usize, usize, usize)) -> &mut f64 {
        let i = self.index_of(y, x, c);
        &mut self.data[i]
    }
}

/// Three stacked tensor-shaped fields: horizontal, vertical and
/// inter-channel components of a (weighted) gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientStack {
    pub dx: ImageTensor,
    pub dy: ImageTensor,
    pub dc: ImageTensor,
}

impl GradientStack {
    pub fn new(dx: ImageTensor, dy: ImageTensor, dc: ImageTensor) -> Result<Self> {
        dx.ensure_same_shape(&dy)?;
        dx.ensure_same_shape(&dc)?;
        Ok(Self { dx, dy, dc })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        let z = ImageTensor::zeros(height, width)?;
        Ok(Self {
            dx: z.clone(),
            dy: z.clone(),
            dc: z,
        })
    }

    pub fn zeros_like(t: &ImageTensor) -> Self {
        Self {
            dx: t.zeros_like(),
            dy: t.zeros_like(),
            dc: t.zeros_like(),
        }
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.dx.shape()
    }

    pub fn fields(&self) -> [&ImageTensor; 3] {
        [&self.dx, &self.dy, &self.dc]
    }

    fn try_zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Copy) -> Result<Self> {
        Ok(Self {
            dx: self.dx.zip_map(&other.dx, f)?,
            dy: self.dy.zip_map(&other.dy, f)?,
            dc: self.dc.zip_map(&other.dc, f)?,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.try_zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.try_zip(other, |a, b| a - b)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.try_zip(other, move |x, y| a * x + b * y)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dx: self.dx.scale(s),
            dy: self.dy.scale(s),
            dc: self.dc.scale(s),
        }
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        Ok(self.dx.dot(&other.dx)? + self.dy.dot(&other.dy)? + self.dc.dot(&other.dc)?)
    }

    pub fn norm(&self) -> f64 {
        self.fields()
            .iter()
            .map(|f| f.as_slice().iter().map(|a| a * a).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.fields().iter().map(|f| f.max_abs()).fold(0.0, f64::max)
    }

    /// Per-voxel Euclidean magnitude `sqrt(dx^2 + dy^2 + dc^2)`.
    pub fn magnitudes(&self) -> ImageTensor {
        let mut out = self.dx.zeros_like();
        let (x, y, c) = (self.dx.as_slice(), self.dy.as_slice(), self.dc.as_slice());
        for (i, m) in out.as_mut_slice().iter_mut().enumerate() {
            *m = (x[i] * x[i] + y[i] * y[i] + c[i] * c[i]).sqrt();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_fill() {
        let t = ImageTensor::new(2, 2, 0.0).unwrap();
        assert_eq!(t.len(), 12);
        assert!(t.as_slice().iter().all(|&v| v == 0.0));

        let t = ImageTensor::new(3, 4, 1.0).unwrap();
        assert_eq!(t.len(), 36);
        assert!(t.as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn too_small_is_rejected() {
        assert!(matches!(
            ImageTensor::new(1, 5, 0.5),
            Err(Error::DimensionTooSmall { height: 1, width: 5 })
        ));
        assert!(ImageTensor::new(5, 1, 0.5).is_err());
        assert!(ImageTensor::from_vec(2, 2, vec![0.0; 11]).is_err());
    }

    #[test]
    fn dot_counts_and_annihilates() {
        let ones = ImageTensor::new(2, 2, 1.0).unwrap();
        assert_eq!(ones.dot(&ones).unwrap(), 12.0);
        let a = ImageTensor::from_fn(2, 2, |y, x, c| (y * 7 + x * 3 + c) as f64 - 2.5).unwrap();
        assert_eq!(a.dot(&ones.zeros_like()).unwrap(), 0.0);
    }

    #[test]
    fn dot_rejects_mismatch() {
        let a = ImageTensor::zeros(2, 3).unwrap();
        let b = ImageTensor::zeros(3, 2).unwrap();
        assert!(matches!(a.dot(&b), Err(Error::ShapeMismatch { .. })));
        let ga = GradientStack::zeros_like(&a);
        let gb = GradientStack::zeros_like(&b);
        assert!(ga.dot(&gb).is_err());
    }

    #[test]
    fn clamp_entries() {
        let t = ImageTensor::from_vec(
            2,
            2,
            vec![-0.2, 1.7, 0.4, 0.0, 1.0, 0.5, 0.1, 0.2, 0.3, 0.9, 2.0, -3.0],
        )
        .unwrap();
        let c = t.clamp01();
        assert_eq!(&c.as_slice()[..3], &[0.0, 1.0, 0.4]);
        assert!(c.is_image_valued());
    }

    #[test]
    fn layout_is_channel_minor() {
        let t = ImageTensor::from_fn(2, 3, |y, x, c| (100 * y + 10 * x + c) as f64).unwrap();
        assert_eq!(t.as_slice()[..6], [0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        assert_eq!(t[(1, 2, 1)], 121.0);
        assert_eq!(t.index_of(1, 0, 0), 9);
    }

    #[test]
    fn channel_means_and_scaling() {
        let t = ImageTensor::from_fn(2, 2, |_, _, c| [0.2, 0.5, 0.8][c]).unwrap();
        let m = t.channel_means();
        for (a, b) in m.iter().zip([0.2, 0.5, 0.8]) {
            assert!((a - b).abs() < 1e-15);
        }
        let s = t.scale_channels([2.0, 0.0, 1.0]);
        assert_eq!(s[(1, 1, 0)], 0.4);
        assert_eq!(s[(1, 1, 1)], 0.0);
    }
}
