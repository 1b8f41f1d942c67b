//! Dense feed-forward classifier on f64.
//!
//! Hidden layers share one activation; the output layer is linear and feeds a
//! numerically stable softmax cross-entropy. Backprop is exact, updates are
//! classic momentum SGD with optional weight decay, L1 shrinkage, and a
//! per-parameter mask. Everything is seeded and sequential, so two models
//! built and trained the same way are bit-identical.

use rand::distributions::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    /// Derivative at preactivation `z`; the ReLU kink at 0 takes slope 0.
    fn slope(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// A batch of examples: row-major inputs plus integer labels.
#[derive(Debug, Clone)]
pub struct Batch {
    inputs: Vec<f64>,
    labels: Vec<usize>,
    input_dim: usize,
}

impl Batch {
    pub fn new(inputs: Vec<f64>, labels: Vec<usize>, input_dim: usize) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Validation("batch input_dim must be positive".into()));
        }
        if labels.is_empty() {
            return Err(Error::Validation("batch must contain at least one example".into()));
        }
        if inputs.len() != labels.len() * input_dim {
            return Err(Error::Validation(format!(
                "batch has {} input values, expected {} ({} examples x dim {})",
                inputs.len(),
                labels.len() * input_dim,
                labels.len(),
                input_dim
            )));
        }
        if inputs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("batch inputs must be finite".into()));
        }
        Ok(Batch { inputs, labels, input_dim })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.input_dim..(i + 1) * self.input_dim]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

/// Per-layer gradients matching a model's parameter layout.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Per-parameter update mask; `true` means the parameter may move.
#[derive(Debug, Clone)]
pub struct ParamMask {
    pub weights: Vec<Vec<bool>>,
    pub biases: Vec<Vec<bool>>,
}

impl ParamMask {
    /// Mask allowing every parameter to move.
    pub fn full(model: &ModelState) -> Self {
        ParamMask {
            weights: model.weights.iter().map(|w| vec![true; w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![true; b.len()]).collect(),
        }
    }

    /// Number of parameters the mask lets move.
    pub fn count_enabled(&self) -> usize {
        let w: usize = self.weights.iter().map(|l| l.iter().filter(|&&m| m).count()).sum();
        let b: usize = self.biases.iter().map(|l| l.iter().filter(|&&m| m).count()).sum();
        w + b
    }
}

/// Momentum-SGD hyperparameters for one step.
#[derive(Debug, Clone, Copy)]
pub struct SgdHyper {
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub l1_gamma: f64,
}

/// Weights, biases, and momentum buffers of a dense feed-forward net.
///
/// `layer_dims` runs input → hidden... → output; weights are row-major
/// (out × in) per layer.
#[derive(Debug, Clone)]
pub struct ModelState {
    pub layer_dims: Vec<usize>,
    pub activation: Activation,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub(crate) w_momentum: Vec<Vec<f64>>,
    pub(crate) b_momentum: Vec<Vec<f64>>,
    pub rng_seed: u64,
}

impl ModelState {
    /// Fresh model: Xavier-uniform weights (±√(6/(fan_in+fan_out))) drawn from
    /// a ChaCha stream seeded by `seed`; biases and momentum start at zero.
    pub fn init(layer_dims: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::Validation(
                "layer_dims needs at least an input and an output dimension".into(),
            ));
        }
        if layer_dims.iter().any(|&d| d == 0) {
            return Err(Error::Validation("layer dimensions must be positive".into()));
        }
        if *layer_dims.last().unwrap() < 2 {
            return Err(Error::Validation("output layer needs at least two classes".into()));
        }
        let mut r = rng::rng(rng::mix(seed, rng::tag::INIT));
        let mut weights = Vec::with_capacity(layer_dims.len() - 1);
        let mut biases = Vec::with_capacity(layer_dims.len() - 1);
        for l in 0..layer_dims.len() - 1 {
            let (fan_in, fan_out) = (layer_dims[l], layer_dims[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            weights.push((0..fan_in * fan_out).map(|_| dist.sample(&mut r)).collect());
            biases.push(vec![0.0; fan_out]);
        }
        let w_momentum = weights.iter().map(|w: &Vec<f64>| vec![0.0; w.len()]).collect();
        let b_momentum = biases.iter().map(|b: &Vec<f64>| vec![0.0; b.len()]).collect();
        Ok(ModelState {
            layer_dims: layer_dims.to_vec(),
            activation,
            weights,
            biases,
            w_momentum,
            b_momentum,
            rng_seed: seed,
        })
    }

    /// All-zero parameters and buffers: predicts the uniform distribution
    /// everywhere. Useful as a degenerate fixture.
    pub fn zeroed(layer_dims: &[usize], activation: Activation) -> ModelState {
        let mut m = ModelState::init(layer_dims, activation, 0).expect("valid dims");
        for w in &mut m.weights {
            w.iter_mut().for_each(|v| *v = 0.0);
        }
        m
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn n_classes(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn n_params(&self) -> usize {
        let w: usize = self.weights.iter().map(Vec::len).sum();
        let b: usize = self.biases.iter().map(Vec::len).sum();
        w + b
    }

    /// Bit-level equality of parameters and momentum buffers (distinguishes
    /// ±0.0; NaN compares equal to itself).
    pub fn bits_eq(&self, other: &ModelState) -> bool {
        fn arrays_eq(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
            a.len() == b.len()
                && a.iter().zip(b).all(|(x, y)| {
                    x.len() == y.len()
                        && x.iter().zip(y).all(|(u, v)| u.to_bits() == v.to_bits())
                })
        }
        self.layer_dims == other.layer_dims
            && self.activation == other.activation
            && arrays_eq(&self.weights, &other.weights)
            && arrays_eq(&self.biases, &other.biases)
            && arrays_eq(&self.w_momentum, &other.w_momentum)
            && arrays_eq(&self.b_momentum, &other.b_momentum)
    }

    /// Sum of absolute parameter values (weights and biases).
    pub fn l1_norm(&self) -> f64 {
        let sum = |arrs: &[Vec<f64>]| arrs.iter().flatten().map(|v| v.abs()).sum::<f64>();
        sum(&self.weights) + sum(&self.biases)
    }

    /// All parameters and buffers are finite.
    pub fn is_finite(&self) -> bool {
        let all = |arrs: &[Vec<f64>]| arrs.iter().flatten().all(|v| v.is_finite());
        all(&self.weights) && all(&self.biases) && all(&self.w_momentum) && all(&self.b_momentum)
    }

    fn check_batch(&self, batch: &Batch) -> Result<()> {
        if batch.input_dim() != self.input_dim() {
            return Err(Error::Validation(format!(
                "batch input_dim {} does not match model input_dim {}",
                batch.input_dim(),
                self.input_dim()
            )));
        }
        if let Some(&l) = batch.labels().iter().find(|&&l| l >= self.n_classes()) {
            return Err(Error::Validation(format!(
                "label {} out of range for {} classes",
                l,
                self.n_classes()
            )));
        }
        Ok(())
    }

    /// Preactivations and post-activations for one input, layer by layer.
    fn trace(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n_layers = self.weights.len();
        let mut pre = Vec::with_capacity(n_layers);
        let mut post = Vec::with_capacity(n_layers);
        let mut a: Vec<f64> = x.to_vec();
        for l in 0..n_layers {
            let (fan_in, fan_out) = (self.layer_dims[l], self.layer_dims[l + 1]);
            let w = &self.weights[l];
            let mut z = self.biases[l].clone();
            for (j, zj) in z.iter_mut().enumerate() {
                let row = &w[j * fan_in..(j + 1) * fan_in];
                let mut acc = 0.0;
                for i in 0..fan_in {
                    acc += row[i] * a[i];
                }
                *zj += acc;
            }
            let out: Vec<f64> = if l + 1 == n_layers {
                z.clone() // logits stay linear
            } else {
                z.iter().map(|&v| self.activation.apply(v)).collect()
            };
            pre.push(z);
            post.push(out.clone());
            a = out;
            let _ = fan_out;
        }
        (pre, post)
    }

    /// Logits for every example in the batch, one row per example.
    pub fn forward(&self, batch: &Batch) -> Result<Vec<Vec<f64>>> {
        self.check_batch(batch)?;
        let mut logits = Vec::with_capacity(batch.len());
        for i in 0..batch.len() {
            let (_, post) = self.trace(batch.input(i));
            logits.push(post.last().unwrap().clone());
        }
        Ok(logits)
    }

    /// Mean cross-entropy gradients over the batch for all weights and biases.
    pub fn backward(&self, batch: &Batch) -> Result<Gradients> {
        self.check_batch(batch)?;
        let n_layers = self.weights.len();
        let mut gw: Vec<Vec<f64>> = self.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let mut gb: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let inv_n = 1.0 / batch.len() as f64;
        for e in 0..batch.len() {
            let x = batch.input(e);
            let (pre, post) = self.trace(x);
            let probs = stable_softmax(post.last().unwrap());
            // delta at the output: (p - onehot) / n
            let mut delta: Vec<f64> = probs.iter().map(|&p| p * inv_n).collect();
            delta[batch.labels()[e]] -= inv_n;
            for l in (0..n_layers).rev() {
                let fan_in = self.layer_dims[l];
                let below: &[f64] = if l == 0 { x } else { &post[l - 1] };
                for (j, &d) in delta.iter().enumerate() {
                    let row = &mut gw[l][j * fan_in..(j + 1) * fan_in];
                    for i in 0..fan_in {
                        row[i] += d * below[i];
                    }
                    gb[l][j] += d;
                }
                if l > 0 {
                    let w = &self.weights[l];
                    let mut next = vec![0.0; fan_in];
                    for (j, &d) in delta.iter().enumerate() {
                        let row = &w[j * fan_in..(j + 1) * fan_in];
                        for i in 0..fan_in {
                            next[i] += row[i] * d;
                        }
                    }
                    for i in 0..fan_in {
                        next[i] *= self.activation.slope(pre[l - 1][i]);
                    }
                    delta = next;
                }
            }
        }
        Ok(Gradients { weights: gw, biases: gb })
    }

    /// Gradient of one example's cross-entropy loss with respect to its input.
    pub fn input_gradient(&self, x: &[f64], label: usize) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Validation(format!(
                "input has dim {}, model expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        if label >= self.n_classes() {
            return Err(Error::Validation(format!(
                "label {} out of range for {} classes",
                label,
                self.n_classes()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("input must be finite".into()));
        }
        let n_layers = self.weights.len();
        let (pre, post) = self.trace(x);
        let probs = stable_softmax(post.last().unwrap());
        let mut delta: Vec<f64> = probs;
        delta[label] -= 1.0;
        for l in (0..n_layers).rev() {
            let fan_in = self.layer_dims[l];
            let w = &self.weights[l];
            let mut next = vec![0.0; fan_in];
            for (j, &d) in delta.iter().enumerate() {
                let row = &w[j * fan_in..(j + 1) * fan_in];
                for i in 0..fan_in {
                    next[i] += row[i] * d;
                }
            }
            if l > 0 {
                for i in 0..fan_in {
                    next[i] *= self.activation.slope(pre[l - 1][i]);
                }
            }
            delta = next;
        }
        Ok(delta)
    }

    /// One momentum-SGD step:
    /// buffer ← momentum·buffer + (grad + weight_decay·w + l1_gamma·sign(w)),
    /// w ← w − lr·buffer. Masked-out parameters (and their buffers) stay put.
    /// sign(0) = 0, so L1 never moves a weight sitting exactly at zero.
    pub fn sgd_step(
        &mut self,
        grads: &Gradients,
        hyper: &SgdHyper,
        mask: Option<&ParamMask>,
    ) -> Result<()> {
        let shape_ok = |arrs: &[Vec<f64>], like: &[Vec<f64>]| {
            arrs.len() == like.len() && arrs.iter().zip(like).all(|(a, b)| a.len() == b.len())
        };
        if !shape_ok(&grads.weights, &self.weights) || !shape_ok(&grads.biases, &self.biases) {
            return Err(Error::Validation("gradient shapes do not match model".into()));
        }
        if let Some(m) = mask {
            let mask_ok = m.weights.len() == self.weights.len()
                && m.weights.iter().zip(&self.weights).all(|(a, b)| a.len() == b.len())
                && m.biases.len() == self.biases.len()
                && m.biases.iter().zip(&self.biases).all(|(a, b)| a.len() == b.len());
            if !mask_ok {
                return Err(Error::Validation("mask shapes do not match model".into()));
            }
        }
        for l in 0..self.weights.len() {
            step_array(
                &mut self.weights[l],
                &mut self.w_momentum[l],
                &grads.weights[l],
                hyper,
                mask.map(|m| m.weights[l].as_slice()),
            );
            step_array(
                &mut self.biases[l],
                &mut self.b_momentum[l],
                &grads.biases[l],
                hyper,
                mask.map(|m| m.biases[l].as_slice()),
            );
        }
        Ok(())
    }
}

fn step_array(
    params: &mut [f64],
    momentum: &mut [f64],
    grads: &[f64],
    hyper: &SgdHyper,
    mask: Option<&[bool]>,
) {
    for i in 0..params.len() {
        if let Some(m) = mask {
            if !m[i] {
                continue;
            }
        }
        let mut g = grads[i];
        // Skip zero-coefficient terms entirely so a zero weight_decay or
        // l1_gamma run is bit-identical to plain SGD (no ±0.0 drift).
        if hyper.weight_decay != 0.0 {
            g += hyper.weight_decay * params[i];
        }
        if hyper.l1_gamma != 0.0 && params[i] != 0.0 {
            g += hyper.l1_gamma * params[i].signum();
        }
        momentum[i] = hyper.momentum * momentum[i] + g;
        params[i] -= hyper.lr * momentum[i];
    }
}

fn stable_softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|&z| (z - m).exp()).sum();
    let log_sum = m + sum.ln();
    logits.iter().map(|&z| (z - log_sum).exp()).collect()
}

/// Softmax probabilities (max-subtracted for stability) and mean cross-entropy
/// loss over the rows.
pub fn softmax_xent(logits: &[Vec<f64>], labels: &[usize]) -> Result<(Vec<Vec<f64>>, f64)> {
    if logits.is_empty() {
        return Err(Error::Validation("softmax_xent needs at least one row".into()));
    }
    if logits.len() != labels.len() {
        return Err(Error::Validation(format!(
            "{} logit rows but {} labels",
            logits.len(),
            labels.len()
        )));
    }
    let classes = logits[0].len();
    let mut probs = Vec::with_capacity(logits.len());
    let mut loss = 0.0;
    for (row, &label) in logits.iter().zip(labels) {
        if row.len() != classes {
            return Err(Error::Validation("ragged logit rows".into()));
        }
        if label >= classes {
            return Err(Error::Validation(format!(
                "label {} out of range for {} classes",
                label, classes
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("logits must be finite".into()));
        }
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|&z| (z - m).exp()).sum();
        let log_sum = m + sum.ln();
        loss += log_sum - row[label]; // -log p[label], computed in log space
        probs.push(row.iter().map(|&z| (z - log_sum).exp()).collect());
    }
    Ok((probs, loss / labels.len() as f64))
}

// --- checkpoint serialization -----------------------------------------------
//
// Flat little-endian binary: magic, version, seed, activation, layer_dims,
// then per layer weights (row-major) and biases, then the momentum buffers in
// the same order. Round-trips bit-exactly.

const CKPT_MAGIC: &[u8; 4] = b"ULNN";
const CKPT_VERSION: u32 = 1;

impl ModelState {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(CKPT_MAGIC);
        out.extend_from_slice(&CKPT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.rng_seed.to_le_bytes());
        out.push(match self.activation {
            Activation::Relu => 0,
            Activation::Identity => 1,
        });
        out.extend_from_slice(&(self.layer_dims.len() as u32).to_le_bytes());
        for &d in &self.layer_dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for arrs in [&self.weights, &self.biases, &self.w_momentum, &self.b_momentum] {
            for arr in arrs {
                for v in arr {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Artifact { path: "<checkpoint>".into(), message: msg.into() };
        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
            if *pos + n > bytes.len() {
                return Err(bad("truncated checkpoint"));
            }
            let s = &bytes[*pos..*pos + n];
            *pos += n;
            Ok(s)
        };
        if take(&mut pos, 4)? != CKPT_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
        if version != CKPT_VERSION {
            return Err(bad("unsupported checkpoint version"));
        }
        let rng_seed = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
        let activation = match take(&mut pos, 1)?[0] {
            0 => Activation::Relu,
            1 => Activation::Identity,
            _ => return Err(bad("unknown activation code")),
        };
        let n_dims = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        if n_dims < 2 {
            return Err(bad("layer_dims must have at least two entries"));
        }
        let mut layer_dims = Vec::with_capacity(n_dims);
        for _ in 0..n_dims {
            let d = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
            if d == 0 {
                return Err(bad("zero layer dimension"));
            }
            layer_dims.push(d);
        }
        let read_arrays = |pos: &mut usize, per_layer: &dyn Fn(usize) -> usize| -> Result<Vec<Vec<f64>>> {
            let mut arrs = Vec::with_capacity(n_dims - 1);
            for l in 0..n_dims - 1 {
                let len = per_layer(l);
                let raw = take(pos, len * 8)?;
                arrs.push(
                    raw.chunks_exact(8)
                        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                        .collect(),
                );
            }
            Ok(arrs)
        };
        let dims = layer_dims.clone();
        let weights = read_arrays(&mut pos, &|l| dims[l] * dims[l + 1])?;
        let biases = read_arrays(&mut pos, &|l| dims[l + 1])?;
        let w_momentum = read_arrays(&mut pos, &|l| dims[l] * dims[l + 1])?;
        let b_momentum = read_arrays(&mut pos, &|l| dims[l + 1])?;
        if pos != bytes.len() {
            return Err(bad("trailing bytes after checkpoint payload"));
        }
        Ok(ModelState {
            layer_dims,
            activation,
            weights,
            biases,
            w_momentum,
            b_momentum,
            rng_seed,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Artifact { message, .. } => Error::Artifact {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }
}
