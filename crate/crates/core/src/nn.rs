//! Minimal training stack: layer specs, He initialization, softmax
//! cross-entropy, classical-momentum SGD, and the train/eval driver.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::he_std;
use crate::conv::{conv2d_backward, conv2d_forward, ConvLayer};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::padding::PaddingPolicy;
use crate::tensor::{Shape, Tensor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    Conv {
        k: usize,
        c_out: usize,
        stride: usize,
        policy: PaddingPolicy,
    },
    ReLU,
    BatchNorm,
    GlobalAvgPool,
    Dense {
        units: usize,
    },
}

#[derive(Debug, Clone)]
pub struct NetworkSpec {
    pub layers: Vec<LayerSpec>,
    pub input: Shape,
    pub classes: usize,
}

impl NetworkSpec {
    /// Walk the layer chain and verify shapes compose; returns the output
    /// class count.
    pub fn validate(&self) -> Result<()> {
        let mut c = self.input.c;
        let mut h = self.input.h;
        let mut w = self.input.w;
        let mut pooled = false;
        let mut pool_count = 0;
        let mut last_units = None;
        for (i, layer) in self.layers.iter().enumerate() {
            match *layer {
                LayerSpec::Conv { k, c_out, stride, policy } => {
                    if pooled {
                        return Err(Error::InvalidArgument(format!(
                            "layer {i}: conv after global average pool"
                        )));
                    }
                    policy.check_parity(k)?;
                    if stride != 1 && stride != 2 {
                        return Err(Error::InvalidStride(stride));
                    }
                    if matches!(policy, PaddingPolicy::GroupedSymmetric) && c % 4 != 0 {
                        return Err(Error::ChannelsNotDivisibleBy4 {
                            channels: c,
                            context: "network spec conv",
                        });
                    }
                    if h == 0 || w == 0 {
                        return Err(Error::InvalidArgument(format!(
                            "layer {i}: spatial dims collapsed to zero"
                        )));
                    }
                    c = c_out;
                    h = (h - 1) / stride + 1;
                    w = (w - 1) / stride + 1;
                }
                LayerSpec::ReLU | LayerSpec::BatchNorm => {}
                LayerSpec::GlobalAvgPool => {
                    pooled = true;
                    pool_count += 1;
                    h = 1;
                    w = 1;
                }
                LayerSpec::Dense { units } => {
                    if !pooled {
                        return Err(Error::InvalidArgument(format!(
                            "layer {i}: dense requires a preceding global average pool"
                        )));
                    }
                    c = units;
                    last_units = Some(units);
                }
            }
        }
        if pool_count != 1 {
            return Err(Error::InvalidArgument(format!(
                "exactly one global average pool required, found {pool_count}"
            )));
        }
        match last_units {
            Some(u) if u == self.classes => Ok(()),
            Some(u) => Err(Error::InvalidArgument(format!(
                "final dense has {u} units for {} classes",
                self.classes
            ))),
            None => Err(Error::InvalidArgument("no dense output layer".into())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub eps: f64,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub momentum: f64,
    /// Off by default: eval batches reuse batch statistics (desk-scale
    /// batches are full-size).
    pub use_running_at_eval: bool,
}

impl BatchNorm {
    fn new(channels: usize) -> Self {
        BatchNorm {
            gamma: vec![1.0; channels],
            beta: vec![0.0; channels],
            eps: 1e-5,
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            momentum: 0.1,
            use_running_at_eval: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dense {
    /// Row-major (units, c_in).
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub c_in: usize,
    pub units: usize,
}

#[derive(Debug, Clone)]
pub enum Layer {
    Conv(ConvLayer),
    ReLU,
    BatchNorm(BatchNorm),
    GlobalAvgPool,
    Dense(Dense),
}

#[derive(Debug, Clone)]
pub struct Network {
    pub spec: NetworkSpec,
    pub layers: Vec<Layer>,
}

/// He-normal build; same seed gives bitwise-identical parameters.
pub fn build(spec: &NetworkSpec, seed: u64) -> Result<Network> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = spec.input.c;
    let mut layers = Vec::with_capacity(spec.layers.len());
    for layer in &spec.layers {
        match *layer {
            LayerSpec::Conv { k, c_out, stride, policy } => {
                let w = Tensor::random_normal_with(
                    &mut rng,
                    Shape::new(c_out, c, k, k),
                    0.0,
                    he_std(c, k),
                )?;
                layers.push(Layer::Conv(ConvLayer::new(w, None, stride, policy)?));
                c = c_out;
            }
            LayerSpec::ReLU => layers.push(Layer::ReLU),
            LayerSpec::BatchNorm => layers.push(Layer::BatchNorm(BatchNorm::new(c))),
            LayerSpec::GlobalAvgPool => layers.push(Layer::GlobalAvgPool),
            LayerSpec::Dense { units } => {
                let std = (2.0 / c as f64).sqrt();
                let w = Tensor::random_normal_with(
                    &mut rng,
                    Shape::new(units, c, 1, 1),
                    0.0,
                    std,
                )?;
                layers.push(Layer::Dense(Dense {
                    weights: w.data().to_vec(),
                    bias: vec![0.0; units],
                    c_in: c,
                    units,
                }));
                c = units;
            }
        }
    }
    Ok(Network {
        spec: spec.clone(),
        layers,
    })
}

/// Per-layer values saved by the forward pass for the backward pass.
pub enum LayerCache {
    Conv { input: Tensor },
    ReLU { input: Tensor },
    BatchNorm { input: Tensor, mean: Vec<f64>, var: Vec<f64> },
    GlobalAvgPool { input_shape: Shape },
    Dense { input: Tensor },
}

pub struct ForwardCache {
    entries: Vec<LayerCache>,
}

fn bn_forward(bn: &mut BatchNorm, x: &Tensor, training: bool) -> (Tensor, Vec<f64>, Vec<f64>) {
    let s = x.shape();
    let plane = s.h * s.w;
    let m = (s.n * plane) as f64;
    let mut mean = vec![0.0; s.c];
    let mut var = vec![0.0; s.c];
    let use_running = !training && bn.use_running_at_eval;
    if use_running {
        mean.copy_from_slice(&bn.running_mean);
        var.copy_from_slice(&bn.running_var);
    } else {
        for c in 0..s.c {
            let mut acc = 0.0;
            for n in 0..s.n {
                let base = s.offset(n, c, 0, 0);
                acc += x.data()[base..base + plane].iter().sum::<f64>();
            }
            mean[c] = acc / m;
            let mut vacc = 0.0;
            for n in 0..s.n {
                let base = s.offset(n, c, 0, 0);
                vacc += x.data()[base..base + plane]
                    .iter()
                    .map(|v| (v - mean[c]) * (v - mean[c]))
                    .sum::<f64>();
            }
            var[c] = vacc / m;
        }
        if training {
            for c in 0..s.c {
                bn.running_mean[c] =
                    (1.0 - bn.momentum) * bn.running_mean[c] + bn.momentum * mean[c];
                bn.running_var[c] =
                    (1.0 - bn.momentum) * bn.running_var[c] + bn.momentum * var[c];
            }
        }
    }
    let mut out = Tensor::zeros(s).unwrap();
    for c in 0..s.c {
        let inv = 1.0 / (var[c] + bn.eps).sqrt();
        let scale = bn.gamma[c] * inv;
        let shift = bn.beta[c] - mean[c] * scale;
        for n in 0..s.n {
            let base = s.offset(n, c, 0, 0);
            let src = &x.data()[base..base + plane];
            let dst = &mut out.data_mut()[base..base + plane];
            for (d, v) in dst.iter_mut().zip(src) {
                *d = v * scale + shift;
            }
        }
    }
    (out, mean, var)
}

/// Runs the network; `training` controls BatchNorm statistics handling.
pub fn forward(net: &mut Network, x: &Tensor, training: bool) -> Result<(Tensor, ForwardCache)> {
    if x.shape().c != net.spec.input.c {
        return Err(Error::ChannelMismatch {
            input: x.shape().c,
            expected: net.spec.input.c,
        });
    }
    let mut cur = x.clone();
    let mut entries = Vec::with_capacity(net.layers.len());
    for layer in &mut net.layers {
        match layer {
            Layer::Conv(conv) => {
                let out = conv2d_forward(&cur, conv)?;
                entries.push(LayerCache::Conv { input: cur });
                cur = out;
            }
            Layer::ReLU => {
                let out = cur.relu();
                entries.push(LayerCache::ReLU { input: cur });
                cur = out;
            }
            Layer::BatchNorm(bn) => {
                let (out, mean, var) = bn_forward(bn, &cur, training);
                entries.push(LayerCache::BatchNorm { input: cur, mean, var });
                cur = out;
            }
            Layer::GlobalAvgPool => {
                let s = cur.shape();
                let mut out = Tensor::zeros(Shape::new(s.n, s.c, 1, 1))?;
                let inv = 1.0 / (s.h * s.w) as f64;
                for n in 0..s.n {
                    for c in 0..s.c {
                        let mut acc = 0.0;
                        for y in 0..s.h {
                            for xx in 0..s.w {
                                acc += cur.get(n, c, y, xx);
                            }
                        }
                        out.set(n, c, 0, 0, acc * inv);
                    }
                }
                entries.push(LayerCache::GlobalAvgPool { input_shape: s });
                cur = out;
            }
            Layer::Dense(d) => {
                let s = cur.shape();
                if s.c != d.c_in || s.h != 1 || s.w != 1 {
                    return Err(Error::ShapeMismatch {
                        left: s,
                        right: Shape::new(s.n, d.c_in, 1, 1),
                    });
                }
                let mut out = Tensor::zeros(Shape::new(s.n, d.units, 1, 1))?;
                for n in 0..s.n {
                    for u in 0..d.units {
                        let mut acc = d.bias[u];
                        for c in 0..d.c_in {
                            acc += d.weights[u * d.c_in + c] * cur.get(n, c, 0, 0);
                        }
                        out.set(n, u, 0, 0, acc);
                    }
                }
                entries.push(LayerCache::Dense { input: cur });
                cur = out;
            }
        }
    }
    Ok((cur, ForwardCache { entries }))
}

/// Parameter gradients, mirroring the network's layer list.
pub enum LayerGrads {
    Conv { d_weights: Tensor, d_bias: Option<Vec<f64>> },
    BatchNorm { d_gamma: Vec<f64>, d_beta: Vec<f64> },
    Dense { d_weights: Vec<f64>, d_bias: Vec<f64> },
    None,
}

pub struct NetworkGrads {
    pub layers: Vec<LayerGrads>,
}

/// Exact adjoint of [`forward`] in training mode.
pub fn backward(
    net: &Network,
    cache: &ForwardCache,
    d_logits: &Tensor,
) -> Result<NetworkGrads> {
    let mut grads: Vec<LayerGrads> = Vec::with_capacity(net.layers.len());
    let mut d = d_logits.clone();
    for (layer, entry) in net.layers.iter().zip(cache.entries.iter()).rev() {
        match (layer, entry) {
            (Layer::Conv(conv), LayerCache::Conv { input }) => {
                let g = conv2d_backward(input, conv, &d)?;
                d = g.d_input;
                grads.push(LayerGrads::Conv {
                    d_weights: g.d_weights,
                    d_bias: g.d_bias,
                });
            }
            (Layer::ReLU, LayerCache::ReLU { input }) => {
                let mut dx = d.clone();
                for (dv, xv) in dx.data_mut().iter_mut().zip(input.data()) {
                    if *xv <= 0.0 {
                        *dv = 0.0;
                    }
                }
                d = dx;
                grads.push(LayerGrads::None);
            }
            (Layer::BatchNorm(bn), LayerCache::BatchNorm { input, mean, var }) => {
                let s = input.shape();
                let plane = s.h * s.w;
                let m = (s.n * plane) as f64;
                let mut d_gamma = vec![0.0; s.c];
                let mut d_beta = vec![0.0; s.c];
                let mut dx = Tensor::zeros(s)?;
                for c in 0..s.c {
                    let inv = 1.0 / (var[c] + bn.eps).sqrt();
                    let mut sum_d = 0.0;
                    let mut sum_dxhat = 0.0;
                    for n in 0..s.n {
                        let base = s.offset(n, c, 0, 0);
                        let gs = &d.data()[base..base + plane];
                        let xs = &input.data()[base..base + plane];
                        for (g, v) in gs.iter().zip(xs) {
                            let xhat = (v - mean[c]) * inv;
                            sum_d += g;
                            sum_dxhat += g * xhat;
                        }
                    }
                    d_gamma[c] = sum_dxhat;
                    d_beta[c] = sum_d;
                    let scale = bn.gamma[c] * inv / m;
                    for n in 0..s.n {
                        let base = s.offset(n, c, 0, 0);
                        let gs = &d.data()[base..base + plane];
                        let xs = &input.data()[base..base + plane];
                        let out = &mut dx.data_mut()[base..base + plane];
                        for ((o, g), v) in out.iter_mut().zip(gs).zip(xs) {
                            let xhat = (v - mean[c]) * inv;
                            *o = scale * (m * g - sum_d - xhat * sum_dxhat);
                        }
                    }
                }
                d = dx;
                grads.push(LayerGrads::BatchNorm { d_gamma, d_beta });
            }
            (Layer::GlobalAvgPool, LayerCache::GlobalAvgPool { input_shape }) => {
                let s = *input_shape;
                let inv = 1.0 / (s.h * s.w) as f64;
                let mut dx = Tensor::zeros(s)?;
                for n in 0..s.n {
                    for c in 0..s.c {
                        let g = d.get(n, c, 0, 0) * inv;
                        for y in 0..s.h {
                            for xx in 0..s.w {
                                dx.set(n, c, y, xx, g);
                            }
                        }
                    }
                }
                d = dx;
                grads.push(LayerGrads::None);
            }
            (Layer::Dense(dn), LayerCache::Dense { input }) => {
                let s = input.shape();
                let mut d_weights = vec![0.0; dn.weights.len()];
                let mut d_bias = vec![0.0; dn.units];
                let mut dx = Tensor::zeros(s)?;
                for n in 0..s.n {
                    for u in 0..dn.units {
                        let g = d.get(n, u, 0, 0);
                        d_bias[u] += g;
                        for c in 0..dn.c_in {
                            d_weights[u * dn.c_in + c] += g * input.get(n, c, 0, 0);
                            let cur = dx.get(n, c, 0, 0);
                            dx.set(n, c, 0, 0, cur + g * dn.weights[u * dn.c_in + c]);
                        }
                    }
                }
                d = dx;
                grads.push(LayerGrads::Dense { d_weights, d_bias });
            }
            _ => unreachable!("cache entries mirror the layer list"),
        }
    }
    grads.reverse();
    Ok(NetworkGrads { layers: grads })
}

/// Softmax cross-entropy, mean over the batch. Returns the loss and
/// d_logits.
pub fn cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<(f64, Tensor)> {
    let s = logits.shape();
    if s.n != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} logit rows for {} labels",
            s.n,
            labels.len()
        )));
    }
    let classes = s.c;
    for &l in labels {
        if l >= classes {
            return Err(Error::LabelOutOfRange { label: l, classes });
        }
    }
    let mut loss = 0.0;
    let mut d = Tensor::zeros(s)?;
    let inv_n = 1.0 / s.n as f64;
    for n in 0..s.n {
        let row: Vec<f64> = (0..classes).map(|c| logits.get(n, c, 0, 0)).collect();
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        loss -= (exps[labels[n]] / z).ln() * inv_n;
        for c in 0..classes {
            let p = exps[c] / z;
            let target = if c == labels[n] { 1.0 } else { 0.0 };
            d.set(n, c, 0, 0, (p - target) * inv_n);
        }
    }
    Ok((loss, d))
}

/// Learning-rate schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LrSchedule {
    Constant,
    /// Multiply by `gamma` every `every` epochs.
    Step { gamma: f64, every: usize },
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub seed: u64,
    pub schedule: LrSchedule,
    /// Evaluate test accuracy every this many epochs (the final epoch is
    /// always evaluated); metrics rows exist only for evaluated epochs.
    pub eval_every: usize,
}

impl TrainConfig {
    pub fn lr_at(&self, epoch: usize) -> f64 {
        match self.schedule {
            LrSchedule::Constant => self.learning_rate,
            LrSchedule::Step { gamma, every } => {
                self.learning_rate * gamma.powi((epoch / every.max(1)) as i32)
            }
        }
    }
}

/// Momentum buffers, one slot per layer, allocated lazily on first use.
pub struct SgdState {
    velocity: Vec<Option<VelocitySlot>>,
}

enum VelocitySlot {
    Conv { w: Vec<f64>, b: Vec<f64> },
    BatchNorm { gamma: Vec<f64>, beta: Vec<f64> },
    Dense { w: Vec<f64>, b: Vec<f64> },
}

impl SgdState {
    pub fn new(net: &Network) -> Self {
        SgdState {
            velocity: (0..net.layers.len()).map(|_| None).collect(),
        }
    }
}

fn momentum_update(v: &mut [f64], theta: &mut [f64], g: &[f64], m: f64, wd: f64, lr: f64) {
    for i in 0..theta.len() {
        v[i] = m * v[i] + g[i] + wd * theta[i];
        theta[i] -= lr * v[i];
    }
}

/// Classical momentum: v <- m*v + g + wd*theta; theta <- theta - lr*v.
/// Weight decay applies to conv/dense weights only, never to biases or
/// BatchNorm scale/shift.
pub fn sgd_step(
    net: &mut Network,
    grads: &NetworkGrads,
    config: &TrainConfig,
    state: &mut SgdState,
    epoch: usize,
) {
    let lr = config.lr_at(epoch);
    let m = config.momentum;
    let wd = config.weight_decay;
    for (i, (layer, grad)) in net.layers.iter_mut().zip(grads.layers.iter()).enumerate() {
        match (layer, grad) {
            (Layer::Conv(conv), LayerGrads::Conv { d_weights, d_bias }) => {
                let slot = state.velocity[i].get_or_insert_with(|| VelocitySlot::Conv {
                    w: vec![0.0; d_weights.data().len()],
                    b: vec![0.0; conv.bias.as_ref().map_or(0, |b| b.len())],
                });
                if let VelocitySlot::Conv { w, b } = slot {
                    momentum_update(w, conv.weights.data_mut(), d_weights.data(), m, wd, lr);
                    if let (Some(bias), Some(db)) = (&mut conv.bias, d_bias) {
                        momentum_update(b, bias, db, m, 0.0, lr);
                    }
                }
            }
            (Layer::BatchNorm(bn), LayerGrads::BatchNorm { d_gamma, d_beta }) => {
                let slot = state.velocity[i].get_or_insert_with(|| VelocitySlot::BatchNorm {
                    gamma: vec![0.0; d_gamma.len()],
                    beta: vec![0.0; d_beta.len()],
                });
                if let VelocitySlot::BatchNorm { gamma, beta } = slot {
                    momentum_update(gamma, &mut bn.gamma, d_gamma, m, 0.0, lr);
                    momentum_update(beta, &mut bn.beta, d_beta, m, 0.0, lr);
                }
            }
            (Layer::Dense(dn), LayerGrads::Dense { d_weights, d_bias }) => {
                let slot = state.velocity[i].get_or_insert_with(|| VelocitySlot::Dense {
                    w: vec![0.0; d_weights.len()],
                    b: vec![0.0; d_bias.len()],
                });
                if let VelocitySlot::Dense { w, b } = slot {
                    momentum_update(w, &mut dn.weights, d_weights, m, wd, lr);
                    momentum_update(b, &mut dn.bias, d_bias, m, 0.0, lr);
                }
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_acc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainMetrics {
    pub seed: u64,
    pub epochs: Vec<EpochMetrics>,
}

impl TrainMetrics {
    pub fn final_test_acc(&self) -> f64 {
        self.epochs.last().map(|e| e.test_acc).unwrap_or(0.0)
    }
}

fn slice_batch(ds: &Dataset, idx: &[usize]) -> Result<(Tensor, Vec<usize>)> {
    let s = ds.images.shape();
    let shape = Shape::new(idx.len(), s.c, s.h, s.w);
    let mut out = Tensor::zeros(shape)?;
    let plane = s.c * s.h * s.w;
    for (row, &i) in idx.iter().enumerate() {
        let src = i * plane;
        let dst = row * plane;
        out.data_mut()[dst..dst + plane].copy_from_slice(&ds.images.data()[src..src + plane]);
    }
    let labels = idx.iter().map(|&i| ds.labels[i]).collect();
    Ok((out, labels))
}

/// Fraction of correctly classified examples, evaluated in batches.
pub fn evaluate(net: &mut Network, ds: &Dataset, batch_size: usize) -> Result<f64> {
    let n = ds.labels.len();
    let mut correct = 0usize;
    let mut start = 0;
    while start < n {
        let end = (start + batch_size).min(n);
        let idx: Vec<usize> = (start..end).collect();
        let (x, labels) = slice_batch(ds, &idx)?;
        let (logits, _) = forward(net, &x, false)?;
        for (row, &label) in labels.iter().enumerate() {
            let s = logits.shape();
            let mut best = 0;
            for c in 1..s.c {
                if logits.get(row, c, 0, 0) > logits.get(row, best, 0, 0) {
                    best = c;
                }
            }
            if best == label {
                correct += 1;
            }
        }
        start = end;
    }
    Ok(correct as f64 / n as f64)
}

/// Full training run; deterministic for a fixed seed (single-threaded).
pub fn train_and_eval(
    spec: &NetworkSpec,
    config: &TrainConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<(Network, TrainMetrics)> {
    let mut net = build(spec, config.seed)?;
    let mut state = SgdState::new(&net);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5eed));
    let n = train.labels.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let (x, labels) = slice_batch(train, chunk)?;
            let (logits, cache) = forward(&mut net, &x, true)?;
            let (loss, d_logits) = cross_entropy(&logits, &labels)?;
            let grads = backward(&net, &cache, &d_logits)?;
            sgd_step(&mut net, &grads, config, &mut state, epoch);
            loss_sum += loss;
            batches += 1;
        }
        let every = config.eval_every.max(1);
        if (epoch + 1) % every == 0 || epoch + 1 == config.epochs {
            let test_acc = evaluate(&mut net, test, config.batch_size)?;
            epochs.push(EpochMetrics {
                epoch,
                train_loss: loss_sum / batches.max(1) as f64,
                test_acc,
            });
        }
    }
    if config.epochs == 0 {
        // no training: report the untrained network once
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let (x, labels) = slice_batch(train, chunk)?;
            let (logits, _) = forward(&mut net, &x, false)?;
            let (loss, _) = cross_entropy(&logits, &labels)?;
            loss_sum += loss;
            batches += 1;
        }
        let test_acc = evaluate(&mut net, test, config.batch_size)?;
        epochs.push(EpochMetrics {
            epoch: 0,
            train_loss: loss_sum / batches.max(1) as f64,
            test_acc,
        });
    }
    Ok((
        net,
        TrainMetrics {
            seed: config.seed,
            epochs,
        },
    ))
}
