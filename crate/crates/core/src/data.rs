//! Synthetic quadrant-blob dataset and an IDX image/label reader.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tensor::{Shape, Tensor};

pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Test,
}

/// Labelled image set in NCHW order; `norm` holds the (mean, std) used to
/// standardize the pixels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub images: Tensor,
    pub labels: Vec<usize>,
    pub classes: usize,
    pub split: SplitTag,
    pub seed: u64,
    pub norm: (f64, f64),
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Blob width and quadrant-boundary clearance, as fractions of image size.
const SIGMA_FRAC: f64 = 1.2 / 16.0;
const MARGIN_FRAC: f64 = 1.0 / 16.0;

fn standardize_images(images: &mut Tensor, norm: Option<(f64, f64)>) -> (f64, f64) {
    let (mean, std) = norm.unwrap_or_else(|| {
        let d = images.data();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / d.len() as f64;
        (mean, var.sqrt().max(1e-12))
    });
    for v in images.data_mut() {
        *v = (*v - mean) / std;
    }
    (mean, std)
}

/// Four-class task: one Gaussian blob per image, centered inside the
/// quadrant named by the label, plus optional pixel noise. Train splits
/// standardize with their own statistics; pass a train split's `norm` to
/// generate a matching test split.
pub fn gen_quadrant_blobs_with(
    n: usize,
    size: usize,
    noise_std: f64,
    seed: u64,
    split: SplitTag,
    norm: Option<(f64, f64)>,
) -> Result<Dataset> {
    if size < 16 {
        return Err(Error::InvalidArgument(format!(
            "image size {size} below minimum 16"
        )));
    }
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 examples, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..n).map(|i| i % 4).collect();
    labels.shuffle(&mut rng);
    let sigma = SIGMA_FRAC * size as f64;
    let margin = MARGIN_FRAC * size as f64;
    let half = size as f64 / 2.0;
    let span = (half - 2.0 * margin).max(0.0);
    let mut images = Tensor::zeros(Shape::new(n, 1, size, size))?;
    for (i, &label) in labels.iter().enumerate() {
        let qy = (label / 2) as f64 * half;
        let qx = (label % 2) as f64 * half;
        let cy = qy + margin + rng.gen::<f64>() * span;
        let cx = qx + margin + rng.gen::<f64>() * span;
        for y in 0..size {
            for x in 0..size {
                let dy = y as f64 - cy;
                let dx = x as f64 - cx;
                let mut v = (-(dy * dy + dx * dx) / (2.0 * sigma * sigma)).exp();
                if noise_std > 0.0 {
                    let e: f64 = rng.sample(StandardNormal);
                    v += noise_std * e;
                }
                images.set(i, 0, y, x, v);
            }
        }
    }
    let norm = standardize_images(&mut images, norm);
    Ok(Dataset {
        images,
        labels,
        classes: 4,
        split,
        seed,
        norm,
    })
}

/// Train-split convenience wrapper around [`gen_quadrant_blobs_with`].
pub fn gen_quadrant_blobs(n: usize, size: usize, noise_std: f64, seed: u64) -> Result<Dataset> {
    gen_quadrant_blobs_with(n, size, noise_std, seed, SplitTag::Train, None)
}

fn read_u32_be<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated {what}: {e}")))?;
    Ok(u32::from_be_bytes(buf))
}

/// Reads IDX image (magic 0x00000803) and label (magic 0x00000801) streams
/// into a standardized dataset. Pixels are scaled to [0, 1] before
/// standardization with the set's own statistics.
pub fn load_idx<R: Read, S: Read>(
    images: &mut R,
    labels: &mut S,
    classes: usize,
) -> Result<Dataset> {
    let magic = read_u32_be(images, "image header")?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::Format(format!(
            "bad image magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}"
        )));
    }
    let count = read_u32_be(images, "image header")? as usize;
    let rows = read_u32_be(images, "image header")? as usize;
    let cols = read_u32_be(images, "image header")? as usize;
    let lmagic = read_u32_be(labels, "label header")?;
    if lmagic != IDX_LABEL_MAGIC {
        return Err(Error::Format(format!(
            "bad label magic 0x{lmagic:08x}, expected 0x{IDX_LABEL_MAGIC:08x}"
        )));
    }
    let lcount = read_u32_be(labels, "label header")? as usize;
    if lcount != count {
        return Err(Error::Format(format!(
            "{count} images but {lcount} labels"
        )));
    }
    let mut pixels = vec![0u8; count * rows * cols];
    images
        .read_exact(&mut pixels)
        .map_err(|e| Error::Format(format!("truncated image data: {e}")))?;
    let mut raw_labels = vec![0u8; count];
    labels
        .read_exact(&mut raw_labels)
        .map_err(|e| Error::Format(format!("truncated label data: {e}")))?;
    let mut out_labels = Vec::with_capacity(count);
    for &l in &raw_labels {
        let l = l as usize;
        if l >= classes {
            return Err(Error::LabelOutOfRange { label: l, classes });
        }
        out_labels.push(l);
    }
    let data: Vec<f64> = pixels.iter().map(|&p| p as f64 / 255.0).collect();
    let mut images = Tensor::from_vec(Shape::new(count, 1, rows, cols), data)?;
    let norm = standardize_images(&mut images, None);
    Ok(Dataset {
        images,
        labels: out_labels,
        classes,
        split: SplitTag::Train,
        seed: 0,
        norm,
    })
}

/// Writes an IDX image stream; values are clamped to [0, 255].
pub fn write_idx_images<W: Write>(out: &mut W, images: &[Vec<u8>], rows: usize, cols: usize) -> Result<()> {
    out.write_all(&IDX_IMAGE_MAGIC.to_be_bytes())?;
    out.write_all(&(images.len() as u32).to_be_bytes())?;
    out.write_all(&(rows as u32).to_be_bytes())?;
    out.write_all(&(cols as u32).to_be_bytes())?;
    for img in images {
        if img.len() != rows * cols {
            return Err(Error::Format(format!(
                "image has {} pixels, expected {}",
                img.len(),
                rows * cols
            )));
        }
        out.write_all(img)?;
    }
    Ok(())
}

pub fn write_idx_labels<W: Write>(out: &mut W, labels: &[u8]) -> Result<()> {
    out.write_all(&IDX_LABEL_MAGIC.to_be_bytes())?;
    out.write_all(&(labels.len() as u32).to_be_bytes())?;
    out.write_all(labels)?;
    Ok(())
}
