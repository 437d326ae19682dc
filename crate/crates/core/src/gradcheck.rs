//! Central-difference gradient verification for single conv layers and for
//! whole networks.

use crate::conv::{conv2d_backward, conv2d_forward, ConvLayer};
use crate::error::Result;
use crate::nn::{cross_entropy, forward, Layer, LayerGrads, Network, NetworkGrads};
use crate::tensor::Tensor;

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / 1.0_f64.max(analytic.abs().max(numeric.abs()))
}

/// Evenly spaced sample indices over `len`, at most `samples` of them.
fn sample_indices(len: usize, samples: usize) -> Vec<usize> {
    if len == 0 {
        return Vec::new();
    }
    let n = samples.min(len).max(1);
    (0..n).map(|i| i * len / n).collect()
}

/// Checks a conv layer's input, weight, and bias gradients against central
/// differences of the scalar loss sum(out * r) for a fixed probe tensor r.
/// Returns the maximum relative error over the sampled coordinates.
pub fn check_conv(layer: &ConvLayer, x: &Tensor, step: f64, samples: usize) -> Result<f64> {
    let out = conv2d_forward(x, layer)?;
    let probe = Tensor::random_normal(out.shape(), 0.0, 1.0, 0x9e3779b9)?;
    let grads = conv2d_backward(x, layer, &probe)?;
    let loss = |l: &ConvLayer, xx: &Tensor| -> Result<f64> {
        let o = conv2d_forward(xx, l)?;
        Ok(o.data()
            .iter()
            .zip(probe.data())
            .map(|(a, b)| a * b)
            .sum())
    };
    let mut max_err = 0.0_f64;
    let mut xp = x.clone();
    for i in sample_indices(x.data().len(), samples) {
        let orig = xp.data()[i];
        xp.data_mut()[i] = orig + step;
        let lp = loss(layer, &xp)?;
        xp.data_mut()[i] = orig - step;
        let lm = loss(layer, &xp)?;
        xp.data_mut()[i] = orig;
        max_err = max_err.max(rel_err(grads.d_input.data()[i], (lp - lm) / (2.0 * step)));
    }
    let mut lp_layer = layer.clone();
    for i in sample_indices(layer.weights.data().len(), samples) {
        let orig = lp_layer.weights.data()[i];
        lp_layer.weights.data_mut()[i] = orig + step;
        let lp = loss(&lp_layer, x)?;
        lp_layer.weights.data_mut()[i] = orig - step;
        let lm = loss(&lp_layer, x)?;
        lp_layer.weights.data_mut()[i] = orig;
        max_err = max_err.max(rel_err(grads.d_weights.data()[i], (lp - lm) / (2.0 * step)));
    }
    if layer.bias.is_some() {
        let db = grads.d_bias.as_ref().expect("bias grads present");
        let blen = lp_layer.bias.as_ref().unwrap().len();
        for i in sample_indices(blen, samples) {
            let orig = lp_layer.bias.as_ref().unwrap()[i];
            lp_layer.bias.as_mut().unwrap()[i] = orig + step;
            let lp = loss(&lp_layer, x)?;
            lp_layer.bias.as_mut().unwrap()[i] = orig - step;
            let lm = loss(&lp_layer, x)?;
            lp_layer.bias.as_mut().unwrap()[i] = orig;
            max_err = max_err.max(rel_err(db[i], (lp - lm) / (2.0 * step)));
        }
    }
    Ok(max_err)
}

enum Slot {
    ConvW,
    ConvB,
    BnGamma,
    BnBeta,
    DenseW,
    DenseB,
}

fn slot_mut<'a>(net: &'a mut Network, li: usize, slot: &Slot) -> Option<&'a mut [f64]> {
    match (&mut net.layers[li], slot) {
        (Layer::Conv(c), Slot::ConvW) => Some(c.weights.data_mut()),
        (Layer::Conv(c), Slot::ConvB) => c.bias.as_deref_mut(),
        (Layer::BatchNorm(b), Slot::BnGamma) => Some(&mut b.gamma),
        (Layer::BatchNorm(b), Slot::BnBeta) => Some(&mut b.beta),
        (Layer::Dense(d), Slot::DenseW) => Some(&mut d.weights),
        (Layer::Dense(d), Slot::DenseB) => Some(&mut d.bias),
        _ => None,
    }
}

fn grad_slot<'a>(grads: &'a NetworkGrads, li: usize, slot: &Slot) -> Option<&'a [f64]> {
    match (&grads.layers[li], slot) {
        (LayerGrads::Conv { d_weights, .. }, Slot::ConvW) => Some(d_weights.data()),
        (LayerGrads::Conv { d_bias, .. }, Slot::ConvB) => d_bias.as_deref(),
        (LayerGrads::BatchNorm { d_gamma, .. }, Slot::BnGamma) => Some(d_gamma),
        (LayerGrads::BatchNorm { d_beta, .. }, Slot::BnBeta) => Some(d_beta),
        (LayerGrads::Dense { d_weights, .. }, Slot::DenseW) => Some(d_weights),
        (LayerGrads::Dense { d_bias, .. }, Slot::DenseB) => Some(d_bias),
        _ => None,
    }
}

/// Checks every parameter tensor of a network against central differences
/// of the training-mode cross-entropy loss. `samples` coordinates are
/// probed per parameter tensor. Returns the maximum relative error.
pub fn check_network(
    net: &mut Network,
    grads: &NetworkGrads,
    x: &Tensor,
    labels: &[usize],
    step: f64,
    samples: usize,
) -> f64 {
    let slots = [
        Slot::ConvW,
        Slot::ConvB,
        Slot::BnGamma,
        Slot::BnBeta,
        Slot::DenseW,
        Slot::DenseB,
    ];
    let mut max_err = 0.0_f64;
    for li in 0..net.layers.len() {
        for slot in &slots {
            let len = match slot_mut(net, li, slot) {
                Some(s) => s.len(),
                None => continue,
            };
            for i in sample_indices(len, samples) {
                let analytic = grad_slot(grads, li, slot).expect("grads mirror layers")[i];
                let orig = slot_mut(net, li, slot).unwrap()[i];
                slot_mut(net, li, slot).unwrap()[i] = orig + step;
                let lp = loss_of(net, x, labels);
                slot_mut(net, li, slot).unwrap()[i] = orig - step;
                let lm = loss_of(net, x, labels);
                slot_mut(net, li, slot).unwrap()[i] = orig;
                max_err = max_err.max(rel_err(analytic, (lp - lm) / (2.0 * step)));
            }
        }
    }
    max_err
}

fn loss_of(net: &mut Network, x: &Tensor, labels: &[usize]) -> f64 {
    let (logits, _) = forward(net, x, true).expect("forward during gradcheck");
    cross_entropy(&logits, labels).expect("loss during gradcheck").0
}
