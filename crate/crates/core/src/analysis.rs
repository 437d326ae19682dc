//! Feature-map diagnostics: information quantity Q, |FM|-mass centroids,
//! the layerwise erosion experiment over untrained conv stacks, and the
//! centroid-shift experiment.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conv::{conv2d_forward, ConvLayer};
use crate::error::{Error, Result};
use crate::padding::{Direction, PaddingPolicy};
use crate::tensor::{Shape, Tensor};

/// Q = mean L1-norm of the feature map, additionally averaged over batch and
/// channels so one scalar describes a layer.
pub fn information_quantity(f: &Tensor) -> f64 {
    f.mean_abs()
}

/// Center of |value| mass of the channel-mean map. (y, x) in pixel
/// coordinates; errors on an all-zero tensor.
pub fn centroid(f: &Tensor) -> Result<(f64, f64)> {
    let s = f.shape();
    let mut total = 0.0;
    let mut my = 0.0;
    let mut mx = 0.0;
    for n in 0..s.n {
        for c in 0..s.c {
            for y in 0..s.h {
                for x in 0..s.w {
                    let v = f.get(n, c, y, x).abs();
                    total += v;
                    my += v * y as f64;
                    mx += v * x as f64;
                }
            }
        }
    }
    if total == 0.0 {
        return Err(Error::AllZero("centroid"));
    }
    Ok((my / total, mx / total))
}

/// The compared convolution flavors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelTag {
    C2,
    C2sp,
    C3,
    C4,
    C4sp,
    C5,
}

impl KernelTag {
    pub const ALL: [KernelTag; 6] = [
        KernelTag::C2,
        KernelTag::C2sp,
        KernelTag::C3,
        KernelTag::C4,
        KernelTag::C4sp,
        KernelTag::C5,
    ];

    pub fn k(self) -> usize {
        match self {
            KernelTag::C2 | KernelTag::C2sp => 2,
            KernelTag::C3 => 3,
            KernelTag::C4 | KernelTag::C4sp => 4,
            KernelTag::C5 => 5,
        }
    }

    /// Asymmetric even kernels default to the TensorFlow-style left-top
    /// origin.
    pub fn policy(self) -> PaddingPolicy {
        match self {
            KernelTag::C3 | KernelTag::C5 => PaddingPolicy::SymmetricOdd,
            KernelTag::C2 | KernelTag::C4 => PaddingPolicy::Asymmetric(Direction::OriginLT),
            KernelTag::C2sp | KernelTag::C4sp => PaddingPolicy::GroupedSymmetric,
        }
    }

    pub fn grouped(self) -> bool {
        matches!(self, KernelTag::C2sp | KernelTag::C4sp)
    }
}

impl std::fmt::Display for KernelTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            KernelTag::C2 => "C2",
            KernelTag::C2sp => "C2sp",
            KernelTag::C3 => "C3",
            KernelTag::C4 => "C4",
            KernelTag::C4sp => "C4sp",
            KernelTag::C5 => "C5",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for KernelTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C2" | "c2" => Ok(KernelTag::C2),
            "C2sp" | "c2sp" => Ok(KernelTag::C2sp),
            "C3" | "c3" => Ok(KernelTag::C3),
            "C4" | "c4" => Ok(KernelTag::C4),
            "C4sp" | "c4sp" => Ok(KernelTag::C4sp),
            "C5" | "c5" => Ok(KernelTag::C5),
            _ => Err(Error::InvalidArgument(format!("unknown kernel tag '{s}'"))),
        }
    }
}

/// He-normal fan-in standard deviation for a conv weight.
pub fn he_std(c_in: usize, k: usize) -> f64 {
    (2.0 / (c_in * k * k) as f64).sqrt()
}

/// Configuration of the erosion experiment: a plain He-initialized
/// conv(+ReLU) stack fed with standardized noise, Q recorded after every
/// conv.
#[derive(Debug, Clone)]
pub struct ErosionConfig {
    pub kernels: Vec<KernelTag>,
    pub depth: usize,
    pub width: usize,
    pub input_size: usize,
    pub batch: usize,
    pub seeds: Vec<u64>,
    pub relu: bool,
    /// Channel count doubles and stride 2 applies on the layer after each
    /// listed index.
    pub downsample_after: Vec<usize>,
    /// Measure Q before the ReLU instead of after it.
    pub q_pre_relu: bool,
}

impl Default for ErosionConfig {
    fn default() -> Self {
        ErosionConfig {
            kernels: KernelTag::ALL.to_vec(),
            depth: 54,
            width: 16,
            input_size: 32,
            batch: 8,
            seeds: (0..20).collect(),
            relu: true,
            downsample_after: vec![18, 36],
            q_pre_relu: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ErosionRecord {
    pub tag: KernelTag,
    pub seed: u64,
    /// (layer index, Q), layer indices strictly increasing.
    pub q_per_layer: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct ErosionReport {
    pub config: ErosionConfig,
    pub records: Vec<ErosionRecord>,
}

/// One cell of the erosion experiment. Weights for a given seed are drawn
/// from a stream that does not depend on the tag, so tags with equal kernel
/// size share identical weights and the input batch is common to all tags
/// (paired comparison).
pub fn erosion_cell(config: &ErosionConfig, tag: KernelTag, seed: u64) -> Result<ErosionRecord> {
    if tag.grouped() && config.width % 4 != 0 {
        return Err(Error::ChannelsNotDivisibleBy4 {
            channels: config.width,
            context: "erosion width",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = Shape::new(config.batch, config.width, config.input_size, config.input_size);
    let raw = Tensor::random_normal_with(&mut rng, shape, 0.0, 1.0)?;
    let mut x = standardize(&raw);

    let mut q_per_layer = Vec::with_capacity(config.depth);
    if config.depth == 0 {
        q_per_layer.push((0, information_quantity(&x)));
        return Ok(ErosionRecord { tag, seed, q_per_layer });
    }

    let k = tag.k();
    let mut c = config.width;
    for layer in 1..=config.depth {
        let (stride, c_out) = if config.downsample_after.contains(&(layer - 1)) {
            (2, c * 2)
        } else {
            (1, c)
        };
        let w = Tensor::random_normal_with(
            &mut rng,
            Shape::new(c_out, c, k, k),
            0.0,
            he_std(c, k),
        )?;
        let conv = ConvLayer::new(w, None, stride, tag.policy())?;
        let pre = conv2d_forward(&x, &conv)?;
        x = if config.relu { pre.relu() } else { pre.clone() };
        let measured = if config.q_pre_relu { &pre } else { &x };
        q_per_layer.push((layer, information_quantity(measured)));
        c = c_out;
    }
    Ok(ErosionRecord { tag, seed, q_per_layer })
}

pub fn run_erosion(config: &ErosionConfig) -> Result<ErosionReport> {
    let mut records = Vec::new();
    for &tag in &config.kernels {
        for &seed in &config.seeds {
            records.push(erosion_cell(config, tag, seed)?);
        }
    }
    Ok(ErosionReport {
        config: config.clone(),
        records,
    })
}

/// Result of one pairwise ordering clause at a layer.
#[derive(Debug, Clone)]
pub struct OrderingCheck {
    pub larger: KernelTag,
    pub smaller: KernelTag,
    pub layer: usize,
    /// Mean of the per-seed paired Q difference.
    pub gap: f64,
    /// Twice the standard error of the paired difference across seeds.
    pub two_se: f64,
    pub pass: bool,
}

impl ErosionReport {
    pub fn q_values(&self, tag: KernelTag, layer: usize) -> Vec<(u64, f64)> {
        self.records
            .iter()
            .filter(|r| r.tag == tag)
            .filter_map(|r| {
                r.q_per_layer
                    .iter()
                    .find(|&&(l, _)| l == layer)
                    .map(|&(_, q)| (r.seed, q))
            })
            .collect()
    }

    pub fn mean_q(&self, tag: KernelTag, layer: usize) -> Option<f64> {
        let vs = self.q_values(tag, layer);
        if vs.is_empty() {
            return None;
        }
        Some(vs.iter().map(|&(_, q)| q).sum::<f64>() / vs.len() as f64)
    }

    /// Paired seed-by-seed comparison of Q(larger) - Q(smaller) at a layer.
    pub fn ordering_check(
        &self,
        larger: KernelTag,
        smaller: KernelTag,
        layer: usize,
    ) -> Option<OrderingCheck> {
        let a = self.q_values(larger, layer);
        let b = self.q_values(smaller, layer);
        let diffs: Vec<f64> = a
            .iter()
            .filter_map(|&(seed, qa)| {
                b.iter()
                    .find(|&&(s, _)| s == seed)
                    .map(|&(_, qb)| qa - qb)
            })
            .collect();
        if diffs.len() < 2 {
            return None;
        }
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let two_se = 2.0 * (var / n).sqrt();
        Some(OrderingCheck {
            larger,
            smaller,
            layer,
            gap: mean,
            two_se,
            pass: mean > two_se,
        })
    }

    /// Every (tag, seed, layer) where Q failed to decrease from the previous
    /// layer.
    pub fn monotonicity_violations(&self) -> Vec<(KernelTag, u64, usize)> {
        let mut out = Vec::new();
        for r in &self.records {
            for w in r.q_per_layer.windows(2) {
                if w[1].1 >= w[0].1 {
                    out.push((r.tag, r.seed, w[1].0));
                }
            }
        }
        out
    }

    /// CSV rows: tag, seed, layer, q.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "tag,seed,layer,q")?;
        for r in &self.records {
            for &(layer, q) in &r.q_per_layer {
                writeln!(out, "{},{},{},{:.17e}", r.tag, r.seed, layer, q)?;
            }
        }
        Ok(())
    }
}

/// Subtract the global mean and divide by the global standard deviation.
pub fn standardize(x: &Tensor) -> Tensor {
    let n = x.data().len() as f64;
    let mean = x.sum() / n;
    let var = x.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 {
        return x.map(|v| v - mean);
    }
    x.map(|v| (v - mean) / std)
}

/// What the shift stack's kernels contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelContent {
    /// All weights 1/(c_i k^2): mass-preserving averaging.
    Uniform,
    /// He-normal random weights.
    HeRandom,
}

impl std::str::FromStr for KernelContent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(KernelContent::Uniform),
            "random" | "he" => Ok(KernelContent::HeRandom),
            _ => Err(Error::InvalidArgument(format!("unknown kernel content '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShiftConfig {
    pub k: usize,
    pub policy: PaddingPolicy,
    pub depth: usize,
    pub size: usize,
    pub width: usize,
    pub content: KernelContent,
    pub seed: u64,
    /// Centered delta by default; a supplied image overrides it.
    pub input: Option<Tensor>,
}

impl ShiftConfig {
    pub fn for_tag(tag: KernelTag, depth: usize, size: usize) -> Self {
        ShiftConfig {
            k: tag.k(),
            policy: tag.policy(),
            depth,
            size,
            width: 4,
            content: KernelContent::Uniform,
            seed: 0,
            input: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShiftRow {
    pub layer: usize,
    pub cy: f64,
    pub cx: f64,
    /// Displacement from the input centroid.
    pub dy: f64,
    pub dx: f64,
}

#[derive(Debug, Clone)]
pub struct ShiftReport {
    pub rows: Vec<ShiftRow>,
    /// Set when an all-zero FM cut the trajectory short.
    pub truncated: bool,
}

impl ShiftReport {
    pub fn final_displacement(&self) -> (f64, f64) {
        self.rows.last().map(|r| (r.dy, r.dx)).unwrap_or((0.0, 0.0))
    }

    /// CSV rows: layer, cy, cx, dy, dx.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "layer,cy,cx,dy,dx")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.12},{:.12},{:.12},{:.12}",
                r.layer, r.cy, r.cx, r.dy, r.dx
            )?;
        }
        Ok(())
    }
}

/// Track the |FM|-mass centroid of a delta (or supplied image) through a
/// stack of identical convolutions.
pub fn run_shift(config: &ShiftConfig) -> Result<ShiftReport> {
    let width = config.width;
    if matches!(config.policy, PaddingPolicy::GroupedSymmetric) && width % 4 != 0 {
        return Err(Error::ChannelsNotDivisibleBy4 {
            channels: width,
            context: "shift width",
        });
    }
    let mut x = match &config.input {
        Some(img) => img.clone(),
        None => {
            let mut t = Tensor::zeros(Shape::new(1, width, config.size, config.size))?;
            let mid = config.size / 2;
            for c in 0..width {
                t.set(0, c, mid, mid, 1.0);
            }
            t
        }
    };
    let (cy0, cx0) = centroid(&x)?;
    let mut rows = vec![ShiftRow {
        layer: 0,
        cy: cy0,
        cx: cx0,
        dy: 0.0,
        dx: 0.0,
    }];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut truncated = false;
    for layer in 1..=config.depth {
        let k = config.k;
        let wshape = Shape::new(width, width, k, k);
        let w = match config.content {
            KernelContent::Uniform => {
                let v = 1.0 / (width * k * k) as f64;
                Tensor::from_vec(wshape, vec![v; wshape.len()])?
            }
            KernelContent::HeRandom => {
                Tensor::random_normal_with(&mut rng, wshape, 0.0, he_std(width, k))?
            }
        };
        let conv = ConvLayer::new(w, None, 1, config.policy)?;
        x = conv2d_forward(&x, &conv)?;
        match centroid(&x) {
            Ok((cy, cx)) => rows.push(ShiftRow {
                layer,
                cy,
                cx,
                dy: cy - cy0,
                dx: cx - cx0,
            }),
            Err(Error::AllZero(_)) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ShiftReport { rows, truncated })
}

/// Write the channel-mean |F| map as an 8-bit binary PGM, max value mapped
/// to 255.
pub fn export_heatmap(f: &Tensor, path: &Path) -> Result<()> {
    let s = f.shape();
    let mut map = vec![0.0f64; s.h * s.w];
    for n in 0..s.n {
        for c in 0..s.c {
            for y in 0..s.h {
                for x in 0..s.w {
                    map[y * s.w + x] += f.get(n, c, y, x).abs();
                }
            }
        }
    }
    let max = map.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return Err(Error::AllZero("heatmap"));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", s.w, s.h)?;
    let bytes: Vec<u8> = map
        .iter()
        .map(|&v| (v / max * 255.0).round() as u8)
        .collect();
    out.write_all(&bytes)?;
    Ok(())
}
