//! Dense 4-D tensors in NCHW layout (width fastest), f64 throughout.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// (batch, channels, height, width). Equality is componentwise; any mismatch
/// in a binary op is an error, never a broadcast.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub n: usize,
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl Shape {
    pub fn new(n: usize, c: usize, h: usize, w: usize) -> Self {
        Shape { n, c, h, w }
    }

    pub fn len(&self) -> usize {
        self.n * self.c * self.h * self.w
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat row-major offset, width fastest.
    #[inline(always)]
    pub fn offset(&self, n: usize, c: usize, y: usize, x: usize) -> usize {
        ((n * self.c + c) * self.h + y) * self.w + x
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.n, self.c, self.h, self.w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Shape,
    data: Vec<f64>,
}

impl Tensor {
    fn check_spatial(shape: Shape) -> Result<()> {
        if shape.h == 0 || shape.w == 0 {
            return Err(Error::ZeroSpatial(shape));
        }
        Ok(())
    }

    pub fn zeros(shape: Shape) -> Result<Tensor> {
        Self::check_spatial(shape)?;
        Ok(Tensor {
            shape,
            data: vec![0.0; shape.len()],
        })
    }

    pub fn from_vec(shape: Shape, data: Vec<f64>) -> Result<Tensor> {
        Self::check_spatial(shape)?;
        if data.len() != shape.len() {
            return Err(Error::InvalidArgument(format!(
                "data length {} does not match shape {} (len {})",
                data.len(),
                shape,
                shape.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    /// Deterministic for a fixed seed: same seed, same bits.
    pub fn random_normal(shape: Shape, mean: f64, std: f64, seed: u64) -> Result<Tensor> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_normal_with(&mut rng, shape, mean, std)
    }

    /// Same as [`Tensor::random_normal`] but drawing from a caller-owned
    /// stream, so several tensors can share one seed.
    pub fn random_normal_with(
        rng: &mut ChaCha8Rng,
        shape: Shape,
        mean: f64,
        std: f64,
    ) -> Result<Tensor> {
        Self::check_spatial(shape)?;
        if !(std >= 0.0) {
            return Err(Error::InvalidArgument(format!("std {std} must be >= 0")));
        }
        let dist = Normal::new(mean, std)
            .map_err(|e| Error::InvalidArgument(format!("normal({mean},{std}): {e}")))?;
        let data = (0..shape.len()).map(|_| dist.sample(rng)).collect();
        Ok(Tensor { shape, data })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline(always)]
    pub fn get(&self, n: usize, c: usize, y: usize, x: usize) -> f64 {
        self.data[self.shape.offset(n, c, y, x)]
    }

    #[inline(always)]
    pub fn set(&mut self, n: usize, c: usize, y: usize, x: usize, v: f64) {
        let i = self.shape.offset(n, c, y, x);
        self.data[i] = v;
    }

    fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                left: self.shape,
                right: other.shape,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Tensor {
            shape: self.shape,
            data,
        })
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Tensor {
            shape: self.shape,
            data,
        })
    }

    pub fn scale(&self, a: f64) -> Tensor {
        self.map(|v| v * a)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Tensor {
        Tensor {
            shape: self.shape,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn relu(&self) -> Tensor {
        self.map(|v| v.max(0.0))
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum::<f64>() / self.data.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.data.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }

    /// Index of the first maximum, as (n, c, y, x).
    pub fn argmax(&self) -> (usize, usize, usize, usize) {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        let Shape { c, h, w, .. } = self.shape;
        let x = best % w;
        let y = best / w % h;
        let ch = best / (w * h) % c;
        let n = best / (w * h * c);
        (n, ch, y, x)
    }

    /// Binary dump: four little-endian u32 dims, then n*c*h*w little-endian f64.
    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        for d in [self.shape.n, self.shape.c, self.shape.h, self.shape.w] {
            out.write_all(&(d as u32).to_le_bytes())?;
        }
        for v in &self.data {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(input: &mut R) -> Result<Tensor> {
        let mut dims = [0usize; 4];
        for d in &mut dims {
            let mut buf = [0u8; 4];
            input.read_exact(&mut buf)?;
            *d = u32::from_le_bytes(buf) as usize;
        }
        let shape = Shape::new(dims[0], dims[1], dims[2], dims[3]);
        let mut data = Vec::with_capacity(shape.len());
        let mut buf = [0u8; 8];
        for _ in 0..shape.len() {
            input.read_exact(&mut buf).map_err(|e| {
                Error::Format(format!("truncated tensor dump (expected {} values): {e}", shape.len()))
            })?;
            data.push(f64::from_le_bytes(buf));
        }
        Tensor::from_vec(shape, data)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn load(path: &Path) -> Result<Tensor> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Tensor::read_from(&mut f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_are_zero() {
        let t = Tensor::zeros(Shape::new(1, 1, 2, 2)).unwrap();
        assert_eq!(t.data().len(), 4);
        assert!(t.data().iter().all(|&v| v == 0.0));
        assert_eq!(Tensor::zeros(Shape::new(2, 3, 4, 5)).unwrap().data().len(), 120);
    }

    #[test]
    fn zero_spatial_rejected() {
        assert!(Tensor::zeros(Shape::new(1, 1, 0, 2)).is_err());
        assert!(Tensor::zeros(Shape::new(1, 1, 2, 0)).is_err());
    }

    #[test]
    fn random_normal_deterministic() {
        let s = Shape::new(2, 3, 4, 4);
        let a = Tensor::random_normal(s, 0.0, 1.0, 7).unwrap();
        let b = Tensor::random_normal(s, 0.0, 1.0, 7).unwrap();
        assert_eq!(a.data(), b.data());
        let c = Tensor::random_normal(s, 0.0, 1.0, 8).unwrap();
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn random_normal_zero_std_is_mean() {
        let t = Tensor::random_normal(Shape::new(1, 1, 3, 3), 2.5, 0.0, 1).unwrap();
        assert!(t.data().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn random_normal_sample_mean() {
        let t = Tensor::random_normal(Shape::new(1, 1, 64, 64), 0.0, 1.0, 42).unwrap();
        let mean = t.sum() / 4096.0;
        assert!(mean.abs() < 0.1, "sample mean {mean}");
    }

    #[test]
    fn relu_definition_and_idempotence() {
        let t = Tensor::from_vec(Shape::new(1, 1, 1, 2), vec![-1.0, 2.0]).unwrap();
        let r = t.relu();
        assert_eq!(r.data(), &[0.0, 2.0]);
        assert_eq!(r.relu().data(), r.data());
    }

    #[test]
    fn mean_abs_of_ones() {
        let t = Tensor::from_vec(Shape::new(2, 1, 2, 2), vec![1.0; 8]).unwrap();
        assert_eq!(t.mean_abs(), 1.0);
    }

    #[test]
    fn sum_is_linear() {
        let s = Shape::new(2, 2, 3, 3);
        let a = Tensor::random_normal(s, 0.0, 1.0, 1).unwrap();
        let b = Tensor::random_normal(s, 0.5, 2.0, 2).unwrap();
        let lhs = a.add(&b).unwrap().sum();
        let rhs = a.sum() + b.sum();
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn binary_op_shape_mismatch() {
        let a = Tensor::zeros(Shape::new(1, 1, 2, 2)).unwrap();
        let b = Tensor::zeros(Shape::new(1, 1, 2, 3)).unwrap();
        assert!(matches!(a.add(&b), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn dump_roundtrip() {
        let t = Tensor::random_normal(Shape::new(2, 3, 4, 5), 0.0, 1.0, 9).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 120 * 8);
        let back = Tensor::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn truncated_dump_errors() {
        let t = Tensor::zeros(Shape::new(1, 1, 2, 2)).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 4);
        assert!(Tensor::read_from(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn argmax_position() {
        let mut t = Tensor::zeros(Shape::new(2, 2, 3, 3)).unwrap();
        t.set(1, 0, 2, 1, 5.0);
        assert_eq!(t.argmax(), (1, 0, 2, 1));
    }
}
