//! Forward and backward 2-D convolution under all padding policies, plus a
//! brute-force oracle with no shared code paths.
//!
//! Geometry is always size-preserving for stride 1: the per-axis pad total is
//! k-1, split per the layer's policy. The fused implementation gathers padded
//! reads inside the inner loop; nothing is materialized.

use crate::error::{Error, Result};
use crate::padding::{
    assign_directions, pad_amounts, ChannelAssignment, OffsetTag, PadAmounts, PaddingPolicy,
};
use crate::tensor::{Shape, Tensor};

#[derive(Debug, Clone)]
pub struct ConvLayer {
    pub weights: Tensor,
    pub bias: Option<Vec<f64>>,
    pub k: usize,
    pub stride: usize,
    pub policy: PaddingPolicy,
    /// Present iff policy is GroupedSymmetric.
    pub assignment: Option<ChannelAssignment>,
}

impl ConvLayer {
    /// `weights` is (c_o, c_i, k, k). Builds the channel assignment for
    /// grouped symmetric layers.
    pub fn new(
        weights: Tensor,
        bias: Option<Vec<f64>>,
        stride: usize,
        policy: PaddingPolicy,
    ) -> Result<ConvLayer> {
        let ws = weights.shape();
        if ws.h != ws.w {
            return Err(Error::InvalidArgument(format!(
                "non-square kernel {}x{}",
                ws.h, ws.w
            )));
        }
        let k = ws.h;
        policy.check_parity(k)?;
        if stride != 1 && stride != 2 {
            return Err(Error::InvalidStride(stride));
        }
        if let Some(b) = &bias {
            if b.len() != ws.n {
                return Err(Error::InvalidArgument(format!(
                    "bias length {} != c_o {}",
                    b.len(),
                    ws.n
                )));
            }
        }
        let assignment = match policy {
            PaddingPolicy::GroupedSymmetric => Some(assign_directions(ws.c)?),
            _ => None,
        };
        Ok(ConvLayer {
            weights,
            bias,
            k,
            stride,
            policy,
            assignment,
        })
    }

    pub fn c_in(&self) -> usize {
        self.weights.shape().c
    }

    pub fn c_out(&self) -> usize {
        self.weights.shape().n
    }

    /// Per-input-channel pad amounts realizing this layer's policy.
    pub fn channel_pads(&self) -> Result<Vec<PadAmounts>> {
        let c_i = self.c_in();
        match self.policy {
            PaddingPolicy::SymmetricOdd => {
                let p = pad_amounts(self.k, OffsetTag::Center)?;
                Ok(vec![p; c_i])
            }
            PaddingPolicy::Asymmetric(d) => {
                let p = pad_amounts(self.k, OffsetTag::Shifted(d))?;
                Ok(vec![p; c_i])
            }
            PaddingPolicy::GroupedSymmetric => {
                let assignment = self
                    .assignment
                    .as_ref()
                    .expect("grouped layer carries an assignment");
                assignment
                    .dirs()
                    .iter()
                    .map(|&d| pad_amounts(self.k, OffsetTag::Shifted(d)))
                    .collect()
            }
        }
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.shape().c != self.c_in() {
            return Err(Error::ChannelMismatch {
                input: x.shape().c,
                expected: self.c_in(),
            });
        }
        Ok(())
    }
}

/// Output spatial size for size-preserving padding (total k-1) and the given
/// stride: floor((d - 1) / stride) + 1.
pub fn out_dim(d: usize, stride: usize) -> usize {
    (d - 1) / stride + 1
}

/// Valid output range [lo, hi) such that `o*stride + kk - pad` stays inside
/// [0, limit).
#[inline]
fn valid_out_range(limit: usize, out_limit: usize, stride: usize, kk: usize, pad: usize) -> (usize, usize) {
    let shift = kk as i64 - pad as i64;
    let s = stride as i64;
    let lo = if shift >= 0 { 0 } else { (-shift + s - 1) / s };
    // o*s + shift <= limit-1  =>  o <= (limit-1-shift)/s
    let hi_incl = (limit as i64 - 1 - shift) / s;
    let lo = lo.max(0) as usize;
    let hi = (hi_incl + 1).clamp(0, out_limit as i64) as usize;
    (lo, hi.max(lo))
}

/// Fused forward convolution: per-channel padded reads are gathered in the
/// inner loop without materializing padded copies.
pub fn conv2d_forward(x: &Tensor, layer: &ConvLayer) -> Result<Tensor> {
    layer.check_input(x)?;
    let pads = layer.channel_pads()?;
    let s = x.shape();
    let (k, stride) = (layer.k, layer.stride);
    let (h_out, w_out) = (out_dim(s.h, stride), out_dim(s.w, stride));
    let out_shape = Shape::new(s.n, layer.c_out(), h_out, w_out);
    let mut out = vec![0.0; out_shape.len()];
    let w = layer.weights.data();
    let xd = x.data();
    let ws = layer.weights.shape();

    for n in 0..s.n {
        for co in 0..out_shape.c {
            let obase = out_shape.offset(n, co, 0, 0);
            if let Some(b) = &layer.bias {
                out[obase..obase + h_out * w_out].fill(b[co]);
            }
            for ci in 0..s.c {
                let p = pads[ci];
                for ky in 0..k {
                    let (oy_lo, oy_hi) = valid_out_range(s.h, h_out, stride, ky, p.top);
                    for kx in 0..k {
                        let wv = w[ws.offset(co, ci, ky, kx)];
                        if wv == 0.0 {
                            continue;
                        }
                        let (ox_lo, ox_hi) = valid_out_range(s.w, w_out, stride, kx, p.left);
                        let len = ox_hi - ox_lo;
                        if stride == 1 {
                            // contiguous rows: the inner loop is an axpy
                            for oy in oy_lo..oy_hi {
                                let iy = oy + ky - p.top;
                                let xrow = s.offset(n, ci, iy, 0) + ox_lo + kx - p.left;
                                let orow = obase + oy * w_out + ox_lo;
                                for (o, v) in
                                    out[orow..orow + len].iter_mut().zip(&xd[xrow..xrow + len])
                                {
                                    *o += wv * v;
                                }
                            }
                        } else {
                            for oy in oy_lo..oy_hi {
                                let iy = oy * stride + ky - p.top;
                                let xrow = s.offset(n, ci, iy, 0);
                                let orow = obase + oy * w_out;
                                for ox in ox_lo..ox_hi {
                                    let ix = ox * stride + kx - p.left;
                                    out[orow + ox] += wv * xd[xrow + ix];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor::from_vec(out_shape, out)
}

/// Gradients of a conv layer, mirroring the primal shapes.
#[derive(Debug, Clone)]
pub struct ConvGrads {
    pub d_input: Tensor,
    pub d_weights: Tensor,
    pub d_bias: Option<Vec<f64>>,
}

/// Exact adjoint of [`conv2d_forward`], including the per-group padding
/// geometry. Contributions landing in padded border cells are discarded for
/// d_input (zero-padding adjoint).
pub fn conv2d_backward(x: &Tensor, layer: &ConvLayer, d_out: &Tensor) -> Result<ConvGrads> {
    layer.check_input(x)?;
    let pads = layer.channel_pads()?;
    let s = x.shape();
    let (k, stride) = (layer.k, layer.stride);
    let (h_out, w_out) = (out_dim(s.h, stride), out_dim(s.w, stride));
    let expected = Shape::new(s.n, layer.c_out(), h_out, w_out);
    if d_out.shape() != expected {
        return Err(Error::ShapeMismatch {
            left: d_out.shape(),
            right: expected,
        });
    }

    let ws = layer.weights.shape();
    let w = layer.weights.data();
    let xd = x.data();
    let dod = d_out.data();
    let mut d_input = vec![0.0; s.len()];
    let mut d_weights = vec![0.0; ws.len()];
    let mut d_bias = layer.bias.as_ref().map(|b| vec![0.0; b.len()]);

    for n in 0..s.n {
        for co in 0..expected.c {
            let obase = expected.offset(n, co, 0, 0);
            if let Some(db) = &mut d_bias {
                db[co] += dod[obase..obase + h_out * w_out].iter().sum::<f64>();
            }
            for ci in 0..s.c {
                let p = pads[ci];
                for ky in 0..k {
                    let (oy_lo, oy_hi) = valid_out_range(s.h, h_out, stride, ky, p.top);
                    for kx in 0..k {
                        let widx = ws.offset(co, ci, ky, kx);
                        let wv = w[widx];
                        let mut dw = 0.0;
                        let (ox_lo, ox_hi) = valid_out_range(s.w, w_out, stride, kx, p.left);
                        let len = ox_hi - ox_lo;
                        // reduction and scatter kept in separate passes so
                        // both row loops vectorize
                        if stride == 1 {
                            for oy in oy_lo..oy_hi {
                                let iy = oy + ky - p.top;
                                let xrow = s.offset(n, ci, iy, 0) + ox_lo + kx - p.left;
                                let orow = obase + oy * w_out + ox_lo;
                                let gs = &dod[orow..orow + len];
                                dw += gs
                                    .iter()
                                    .zip(&xd[xrow..xrow + len])
                                    .map(|(g, v)| g * v)
                                    .sum::<f64>();
                                for (o, g) in
                                    d_input[xrow..xrow + len].iter_mut().zip(gs)
                                {
                                    *o += g * wv;
                                }
                            }
                        } else {
                            for oy in oy_lo..oy_hi {
                                let iy = oy * stride + ky - p.top;
                                let xrow = s.offset(n, ci, iy, 0);
                                let orow = obase + oy * w_out;
                                for ox in ox_lo..ox_hi {
                                    let ix = ox * stride + kx - p.left;
                                    dw += dod[orow + ox] * xd[xrow + ix];
                                }
                                for ox in ox_lo..ox_hi {
                                    let ix = ox * stride + kx - p.left;
                                    d_input[xrow + ix] += dod[orow + ox] * wv;
                                }
                            }
                        }
                        d_weights[widx] += dw;
                    }
                }
            }
        }
    }
    Ok(ConvGrads {
        d_input: Tensor::from_vec(s, d_input)?,
        d_weights: Tensor::from_vec(ws, d_weights)?,
        d_bias,
    })
}

/// Independent reference convolution: a direct transcription of the defining
/// sum with explicit per-input-channel zero-padded reads and nothing shared
/// with [`conv2d_forward`].
pub fn naive_oracle_conv(
    x: &Tensor,
    weights: &Tensor,
    per_channel_pads: &[PadAmounts],
    stride: usize,
) -> Result<Tensor> {
    let s = x.shape();
    let ws = weights.shape();
    if ws.c != s.c {
        return Err(Error::ChannelMismatch {
            input: s.c,
            expected: ws.c,
        });
    }
    if per_channel_pads.len() != s.c {
        return Err(Error::InvalidArgument(format!(
            "{} pad entries for {} channels",
            per_channel_pads.len(),
            s.c
        )));
    }
    if stride != 1 && stride != 2 {
        return Err(Error::InvalidStride(stride));
    }
    let k = ws.h;
    let h_out = (s.h - 1) / stride + 1;
    let w_out = (s.w - 1) / stride + 1;
    let mut out = Tensor::zeros(Shape::new(s.n, ws.n, h_out, w_out))?;
    for n in 0..s.n {
        for co in 0..ws.n {
            for oy in 0..h_out {
                for ox in 0..w_out {
                    // summed in kernel-position-major order, which is a
                    // different association than the fused implementation
                    let mut acc = 0.0;
                    for ky in 0..k {
                        for kx in 0..k {
                            for ci in 0..s.c {
                                let p = per_channel_pads[ci];
                                // position in the padded map, shifted back
                                let iy = (oy * stride + ky) as i64 - p.top as i64;
                                let ix = (ox * stride + kx) as i64 - p.left as i64;
                                let v = if iy >= 0
                                    && (iy as usize) < s.h
                                    && ix >= 0
                                    && (ix as usize) < s.w
                                {
                                    x.get(n, ci, iy as usize, ix as usize)
                                } else {
                                    0.0
                                };
                                acc += weights.get(co, ci, ky, kx) * v;
                            }
                        }
                    }
                    out.set(n, co, oy, ox, acc);
                }
            }
        }
    }
    Ok(out)
}
