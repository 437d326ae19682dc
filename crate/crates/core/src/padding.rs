//! Receptive-field geometry for odd and even kernels: offset sets, per-side
//! pad amounts, and the channel-to-direction assignment used by grouped
//! symmetric padding.
//!
//! Axis convention: dy increases downward, dx increases rightward; offset
//! (dy,dx) addresses input pixel (y+dy, x+dx).

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// The four shifted even-kernel receptive fields, named by which
/// corner-adjacent pixel serves as the kernel origin. `OriginLT` is the
/// TensorFlow-style choice and pads one extra zero on the bottom and right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    OriginLT,
    OriginRT,
    OriginLB,
    OriginRB,
}

impl Direction {
    /// Ordered as [R_0, R_1, R_2, R_3] = [left-top, right-top, left-bottom, right-bottom].
    pub const ALL: [Direction; 4] = [
        Direction::OriginLT,
        Direction::OriginRT,
        Direction::OriginLB,
        Direction::OriginRB,
    ];

    pub fn index(self) -> usize {
        match self {
            Direction::OriginLT => 0,
            Direction::OriginRT => 1,
            Direction::OriginLB => 2,
            Direction::OriginRB => 3,
        }
    }

    /// Coordinate-wise mean of the offset set, independent of k.
    pub fn mean_offset(self) -> (f64, f64) {
        match self {
            Direction::OriginLT => (0.5, 0.5),
            Direction::OriginRT => (0.5, -0.5),
            Direction::OriginLB => (-0.5, 0.5),
            Direction::OriginRB => (-0.5, -0.5),
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Direction::OriginLT => "LT",
            Direction::OriginRT => "RT",
            Direction::OriginLB => "LB",
            Direction::OriginRB => "RB",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LT" | "R0" => Ok(Direction::OriginLT),
            "RT" | "R1" => Ok(Direction::OriginRT),
            "LB" | "R2" => Ok(Direction::OriginLB),
            "RB" | "R3" => Ok(Direction::OriginRB),
            _ => Err(Error::InvalidArgument(format!("unknown direction '{s}'"))),
        }
    }
}

/// How a kernel's receptive field is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetTag {
    /// Centered, odd k only.
    Center,
    /// Corner-anchored, even k only.
    Shifted(Direction),
}

/// Padding policy of a conv layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaddingPolicy {
    /// Classic centered padding; odd k only.
    SymmetricOdd,
    /// One corner for all channels; even k only.
    Asymmetric(Direction),
    /// Channels split into four direction groups; even k only,
    /// c_i divisible by 4.
    GroupedSymmetric,
}

impl PaddingPolicy {
    pub fn check_parity(self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::ZeroKernel);
        }
        match self {
            PaddingPolicy::SymmetricOdd if k % 2 == 0 => Err(Error::ParityMismatch {
                k,
                context: "SymmetricOdd (odd k only)",
            }),
            PaddingPolicy::Asymmetric(_) if k % 2 == 1 => Err(Error::ParityMismatch {
                k,
                context: "Asymmetric (even k only)",
            }),
            PaddingPolicy::GroupedSymmetric if k % 2 == 1 => Err(Error::ParityMismatch {
                k,
                context: "GroupedSymmetric (even k only)",
            }),
            _ => Ok(()),
        }
    }
}

/// kappa = ceil((k-1)/2), the maximum offset reach of a k x k kernel.
pub fn kappa(k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::ZeroKernel);
    }
    Ok(k / 2)
}

/// The k^2 offsets a kernel reads, with their anchor tag.
#[derive(Debug, Clone)]
pub struct OffsetSet {
    pub offsets: Vec<(i64, i64)>,
    pub k: usize,
    pub tag: OffsetTag,
}

impl OffsetSet {
    pub fn mean(&self) -> (f64, f64) {
        let n = self.offsets.len() as f64;
        let (sy, sx) = self
            .offsets
            .iter()
            .fold((0i64, 0i64), |(ay, ax), &(dy, dx)| (ay + dy, ax + dx));
        (sy as f64 / n, sx as f64 / n)
    }
}

/// Enumerate the receptive field of a k x k kernel under the given anchor.
pub fn offsets(k: usize, tag: OffsetTag) -> Result<OffsetSet> {
    let kap = kappa(k)? as i64;
    let (y_range, x_range) = match tag {
        OffsetTag::Center => {
            if k % 2 == 0 {
                return Err(Error::ParityMismatch {
                    k,
                    context: "centered offsets (odd k only)",
                });
            }
            ((-kap, kap), (-kap, kap))
        }
        OffsetTag::Shifted(d) => {
            if k % 2 == 1 {
                return Err(Error::ParityMismatch {
                    k,
                    context: "shifted offsets (even k only)",
                });
            }
            let toward_origin = (1 - kap, kap);
            let away = (-kap, kap - 1);
            match d {
                Direction::OriginLT => (toward_origin, toward_origin),
                Direction::OriginRT => (toward_origin, away),
                Direction::OriginLB => (away, toward_origin),
                Direction::OriginRB => (away, away),
            }
        }
    };
    let mut offs = Vec::with_capacity(k * k);
    for dy in y_range.0..=y_range.1 {
        for dx in x_range.0..=x_range.1 {
            offs.push((dy, dx));
        }
    }
    Ok(OffsetSet {
        offsets: offs,
        k,
        tag,
    })
}

/// Per-side zero-pad amounts, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadAmounts {
    pub top: usize,
    pub bottom: usize,
    pub left: usize,
    pub right: usize,
}

impl PadAmounts {
    pub fn none() -> Self {
        PadAmounts {
            top: 0,
            bottom: 0,
            left: 0,
            right: 0,
        }
    }
}

/// Size-preserving pad amounts for stride-1 convolution: the per-axis total
/// is always k-1.
pub fn pad_amounts(k: usize, item: OffsetTag) -> Result<PadAmounts> {
    let kap = kappa(k)?;
    match item {
        OffsetTag::Center => {
            if k % 2 == 0 {
                return Err(Error::ParityMismatch {
                    k,
                    context: "symmetric padding (odd k only)",
                });
            }
            Ok(PadAmounts {
                top: kap,
                bottom: kap,
                left: kap,
                right: kap,
            })
        }
        OffsetTag::Shifted(d) => {
            if k % 2 == 1 {
                return Err(Error::ParityMismatch {
                    k,
                    context: "asymmetric padding (even k only)",
                });
            }
            // The window extends away from the origin corner, so the extra
            // zero goes on the opposite sides.
            let (t, b, l, r) = match d {
                Direction::OriginLT => (kap - 1, kap, kap - 1, kap),
                Direction::OriginRT => (kap - 1, kap, kap, kap - 1),
                Direction::OriginLB => (kap, kap - 1, kap - 1, kap),
                Direction::OriginRB => (kap, kap - 1, kap, kap - 1),
            };
            Ok(PadAmounts {
                top: t,
                bottom: b,
                left: l,
                right: r,
            })
        }
    }
}

/// Which direction each input channel is padded toward, for grouped
/// symmetric padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelAssignment {
    dirs: Vec<Direction>,
}

impl ChannelAssignment {
    pub fn dirs(&self) -> &[Direction] {
        &self.dirs
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn counts(&self) -> [usize; 4] {
        let mut counts = [0usize; 4];
        for d in &self.dirs {
            counts[d.index()] += 1;
        }
        counts
    }

    /// Mean of the channels' direction offsets; exactly (0,0) for every
    /// valid assignment.
    pub fn mean_offset(&self) -> (f64, f64) {
        let (sy, sx) = self
            .dirs
            .iter()
            .map(|d| d.mean_offset())
            .fold((0.0, 0.0), |(ay, ax), (y, x)| (ay + y, ax + x));
        (sy / self.dirs.len() as f64, sx / self.dirs.len() as f64)
    }
}

/// Channel i (0-based) gets direction R_floor(4i/c_i): contiguous quarters
/// [R_0.., R_1.., R_2.., R_3..].
pub fn assign_directions(c_i: usize) -> Result<ChannelAssignment> {
    if c_i == 0 || c_i % 4 != 0 {
        return Err(Error::ChannelsNotDivisibleBy4 {
            channels: c_i,
            context: "assign_directions",
        });
    }
    let dirs = (0..c_i).map(|i| Direction::ALL[4 * i / c_i]).collect();
    Ok(ChannelAssignment { dirs })
}

/// Pad every channel of `x` with `fill` on the given sides.
pub fn pad_tensor(x: &Tensor, pads: PadAmounts, fill: f64) -> Tensor {
    let s = x.shape();
    let out_shape = crate::tensor::Shape::new(
        s.n,
        s.c,
        s.h + pads.top + pads.bottom,
        s.w + pads.left + pads.right,
    );
    let mut data = vec![fill; out_shape.len()];
    for n in 0..s.n {
        for c in 0..s.c {
            for y in 0..s.h {
                let src = s.offset(n, c, y, 0);
                let dst = out_shape.offset(n, c, y + pads.top, pads.left);
                data[dst..dst + s.w].copy_from_slice(&x.data()[src..src + s.w]);
            }
        }
    }
    Tensor::from_vec(out_shape, data).expect("padded shape is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Shape;

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(2).unwrap(), 1);
        assert_eq!(kappa(3).unwrap(), 1);
        assert_eq!(kappa(4).unwrap(), 2);
        assert_eq!(kappa(5).unwrap(), 2);
        assert!(kappa(0).is_err());
    }

    #[test]
    fn centered_offsets_k3() {
        let s = offsets(3, OffsetTag::Center).unwrap();
        assert_eq!(s.offsets.len(), 9);
        assert!(s.offsets.contains(&(-1, -1)));
        assert!(s.offsets.contains(&(1, 1)));
        assert_eq!(s.mean(), (0.0, 0.0));
    }

    #[test]
    fn shifted_offsets_k2_lt() {
        let s = offsets(2, OffsetTag::Shifted(Direction::OriginLT)).unwrap();
        assert_eq!(s.offsets, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert_eq!(s.mean(), (0.5, 0.5));
    }

    #[test]
    fn shifted_offsets_k4_rb() {
        let s = offsets(4, OffsetTag::Shifted(Direction::OriginRB)).unwrap();
        assert_eq!(s.offsets.len(), 16);
        assert_eq!(s.mean(), (-0.5, -0.5));
    }

    #[test]
    fn offsets_parity_mismatch() {
        assert!(offsets(2, OffsetTag::Center).is_err());
        assert!(offsets(3, OffsetTag::Shifted(Direction::OriginLT)).is_err());
    }

    #[test]
    fn shifted_means_cancel() {
        for k in [2usize, 4] {
            let mut total = (0.0, 0.0);
            for d in Direction::ALL {
                let m = offsets(k, OffsetTag::Shifted(d)).unwrap().mean();
                assert_eq!(m.0.abs(), 0.5);
                assert_eq!(m.1.abs(), 0.5);
                total = (total.0 + m.0, total.1 + m.1);
            }
            assert_eq!(total, (0.0, 0.0));
        }
    }

    #[test]
    fn centered_offsets_closed_under_negation() {
        for k in [1usize, 3, 5] {
            let s = offsets(k, OffsetTag::Center).unwrap();
            for &(dy, dx) in &s.offsets {
                assert!(s.offsets.contains(&(-dy, -dx)));
            }
        }
    }

    #[test]
    fn pad_amounts_examples() {
        assert_eq!(
            pad_amounts(2, OffsetTag::Shifted(Direction::OriginLT)).unwrap(),
            PadAmounts { top: 0, bottom: 1, left: 0, right: 1 }
        );
        assert_eq!(
            pad_amounts(3, OffsetTag::Center).unwrap(),
            PadAmounts { top: 1, bottom: 1, left: 1, right: 1 }
        );
        assert_eq!(
            pad_amounts(4, OffsetTag::Shifted(Direction::OriginRB)).unwrap(),
            PadAmounts { top: 2, bottom: 1, left: 2, right: 1 }
        );
    }

    #[test]
    fn pad_amounts_total_is_k_minus_1() {
        for k in [2usize, 4, 6] {
            for d in Direction::ALL {
                let p = pad_amounts(k, OffsetTag::Shifted(d)).unwrap();
                assert_eq!(p.top + p.bottom, k - 1);
                assert_eq!(p.left + p.right, k - 1);
            }
        }
    }

    #[test]
    fn assignment_examples() {
        let a = assign_directions(4).unwrap();
        assert_eq!(a.dirs(), Direction::ALL);
        let b = assign_directions(8).unwrap();
        use Direction::*;
        assert_eq!(
            b.dirs(),
            [OriginLT, OriginLT, OriginRT, OriginRT, OriginLB, OriginLB, OriginRB, OriginRB]
        );
        assert!(assign_directions(6).is_err());
        assert!(assign_directions(0).is_err());
    }

    #[test]
    fn assignment_mean_offset_is_zero_up_to_1024() {
        for c in (4..=1024).step_by(4) {
            let a = assign_directions(c).unwrap();
            assert_eq!(a.mean_offset(), (0.0, 0.0), "c_i = {c}");
            let counts = a.counts();
            assert!(counts.iter().all(|&n| n == c / 4));
        }
    }

    #[test]
    fn pad_tensor_interior_and_mass() {
        let x = Tensor::from_vec(Shape::new(1, 1, 2, 2), vec![1.0; 4]).unwrap();
        let p = pad_tensor(
            &x,
            PadAmounts { top: 1, bottom: 1, left: 1, right: 1 },
            0.0,
        );
        assert_eq!(p.shape(), Shape::new(1, 1, 4, 4));
        assert_eq!(p.sum(), x.sum());
        assert_eq!(p.get(0, 0, 1, 1), 1.0);
        assert_eq!(p.get(0, 0, 0, 0), 0.0);

        let id = pad_tensor(&x, PadAmounts::none(), 7.0);
        assert_eq!(id, x);
    }
}
