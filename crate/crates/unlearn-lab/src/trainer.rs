//! Minibatch SGD training with seeded shuffling, learning-rate schedules,
//! per-epoch event logging, and a divergence guard.
//!
//! One loop engine drives ordinary training and every unlearning variant
//! (masked updates, L1 shrinkage, label overrides, a paired forget-batch
//! ascent term). Retain-batch shuffling and forget-batch shuffling use
//! separate derived streams, so turning an extra term off yields the same
//! batch sequence — that is what makes the reduction identities bit-exact.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{Activation, Batch, ModelState, ParamMask, SgdHyper};
use crate::rng;
use crate::timing::{Timing, BACKWARD_UNITS};

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Constant,
    /// base_lr · ½(1 + cos(π·epoch/epochs))
    Cosine,
    /// base_lr · factor^(number of milestones ≤ epoch)
    Multistep { milestones: Vec<usize>, factor: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden_dims: Vec<usize>,
    pub activation: Activation,
    pub epochs: usize,
    pub batch_size: usize,
    pub base_lr: f64,
    pub schedule: Schedule,
    pub momentum: f64,
    pub weight_decay: f64,
    /// Snapshot the model every max(1, epochs/10) epochs (plus the final one).
    pub collect_checkpoints: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    /// Desk-scale preset: long enough, with no weight decay, that the default
    /// network partially interpolates flipped labels — memorization signals
    /// need that headroom. Weight decay stays available as a knob.
    fn default() -> Self {
        TrainConfig {
            hidden_dims: vec![64, 64],
            activation: Activation::Relu,
            epochs: 40,
            batch_size: 64,
            base_lr: 0.1,
            schedule: Schedule::Cosine,
            momentum: 0.9,
            weight_decay: 0.0,
            collect_checkpoints: false,
            seed: 1,
        }
    }
}

/// Learning rate for a 0-based epoch under the config's schedule.
pub fn lr_at(cfg: &TrainConfig, epoch: usize) -> f64 {
    match &cfg.schedule {
        Schedule::Constant => cfg.base_lr,
        Schedule::Cosine => {
            let t = epoch as f64 / cfg.epochs as f64;
            cfg.base_lr * 0.5 * (1.0 + (std::f64::consts::PI * t).cos())
        }
        Schedule::Multistep { milestones, factor } => {
            let hits = milestones.iter().filter(|&&m| m <= epoch).count() as i32;
            cfg.base_lr * factor.powi(hits)
        }
    }
}

/// Per-epoch, per-example metrics recorded in evaluation mode after each
/// epoch's updates. Rows are parallel to `ids` (sorted ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct EpochEvents {
    pub true_prob: Vec<f64>,
    pub max_prob: Vec<f64>,
    pub entropy: Vec<f64>,
    pub correct: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub ids: Vec<usize>,
    pub epochs: Vec<EpochEvents>,
}

impl EventLog {
    /// CSV body: `epoch,example_id,true_prob,max_prob,entropy,correct`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("epoch,example_id,true_prob,max_prob,entropy,correct\n");
        for (e, ev) in self.epochs.iter().enumerate() {
            for (k, &id) in self.ids.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    e,
                    id,
                    ev.true_prob[k],
                    ev.max_prob[k],
                    ev.entropy[k],
                    ev.correct[k] as u8
                ));
            }
        }
        out
    }
}

#[derive(Debug)]
pub struct TrainRun {
    pub model: ModelState,
    pub events: EventLog,
    pub checkpoints: Vec<ModelState>,
    pub timing: Timing,
}

/// Index of the row maximum; ties go to the lowest class index.
pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn validate_config(cfg: &TrainConfig) -> Result<()> {
    if cfg.epochs == 0 {
        return Err(Error::Validation("epochs must be positive".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Validation("batch_size must be positive".into()));
    }
    if !(cfg.base_lr.is_finite() && cfg.base_lr > 0.0) {
        return Err(Error::Validation(format!("base_lr must be positive, got {}", cfg.base_lr)));
    }
    if !(0.0..1.0).contains(&cfg.momentum) {
        return Err(Error::Validation(format!("momentum must lie in [0,1), got {}", cfg.momentum)));
    }
    if !(cfg.weight_decay >= 0.0) {
        return Err(Error::Validation("weight_decay must be non-negative".into()));
    }
    if let Schedule::Multistep { factor, .. } = cfg.schedule {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(Error::Validation(format!(
                "multistep factor must lie in (0,1], got {factor}"
            )));
        }
    }
    Ok(())
}

fn validate_subset(data: &Dataset, subset: &[usize]) -> Result<Vec<usize>> {
    if subset.is_empty() {
        return Err(Error::Validation("training subset is empty".into()));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Validation("training subset contains duplicate ids".into()));
    }
    if let Some(&id) = sorted.iter().find(|&&id| id >= data.len()) {
        return Err(Error::Validation(format!("training subset id {id} out of range")));
    }
    Ok(sorted)
}

/// Everything the shared loop engine can be asked to do beyond plain SGD.
pub(crate) struct LoopSpec<'a> {
    pub subset: &'a [usize],
    pub epochs: usize,
    pub batch_size: usize,
    pub momentum: f64,
    pub weight_decay: f64,
    pub l1_gamma: f64,
    pub seed: u64,
    pub lr: &'a dyn Fn(usize) -> f64,
    pub mask: Option<&'a ParamMask>,
    /// Forget set cycled alongside retain batches with gradient weight
    /// −(1−beta); the retain gradient gets weight beta. beta = 1 skips the
    /// forget pass entirely.
    pub neggrad: Option<(&'a [usize], f64)>,
    /// Presented-label overrides (random relabeling).
    pub labels: Option<&'a BTreeMap<usize, usize>>,
    pub record_events: bool,
    pub checkpoint_every: Option<usize>,
}

pub(crate) struct LoopOut {
    pub events: EventLog,
    pub checkpoints: Vec<ModelState>,
    pub work_units: u64,
}

fn gather(data: &Dataset, ids: &[usize], labels: Option<&BTreeMap<usize, usize>>) -> Result<Batch> {
    let mut inputs = Vec::with_capacity(ids.len() * data.input_dim);
    let mut out_labels = Vec::with_capacity(ids.len());
    for &id in ids {
        let ex = data.example(id);
        inputs.extend_from_slice(&ex.features);
        let label = labels.and_then(|m| m.get(&id).copied()).unwrap_or(ex.label);
        out_labels.push(label);
    }
    Batch::new(inputs, out_labels, data.input_dim)
}

/// The shared minibatch loop. Mutates `model` in place over `spec.epochs`
/// epochs and reports events, checkpoints, and exact work done.
pub(crate) fn run_loop(model: &mut ModelState, data: &Dataset, spec: &LoopSpec) -> Result<LoopOut> {
    let sorted_ids = validate_subset(data, spec.subset)?;
    if let Some((forget, beta)) = spec.neggrad {
        if forget.is_empty() {
            return Err(Error::Validation("paired forget set is empty".into()));
        }
        if !(0.5..=1.0).contains(&beta) {
            return Err(Error::Validation(format!("beta must lie in [0.5, 1], got {beta}")));
        }
    }
    let mut work = 0u64;
    let mut events = Vec::with_capacity(if spec.record_events { spec.epochs } else { 0 });
    let mut checkpoints = Vec::new();
    for epoch in 0..spec.epochs {
        let lr = (spec.lr)(epoch);
        let hyper = SgdHyper {
            lr,
            momentum: spec.momentum,
            weight_decay: spec.weight_decay,
            l1_gamma: spec.l1_gamma,
        };
        let mut order = sorted_ids.clone();
        order.shuffle(&mut rng::rng(rng::mix(rng::mix(spec.seed, rng::tag::SHUFFLE), epoch as u64)));
        // forget batches draw from their own stream so enabling or disabling
        // the term never perturbs the retain batch sequence
        let mut forget_cycle: Vec<usize> = Vec::new();
        let mut forget_pos = 0usize;
        if let Some((forget, beta)) = spec.neggrad {
            if beta < 1.0 {
                forget_cycle = forget.to_vec();
                forget_cycle.sort_unstable();
                forget_cycle.shuffle(&mut rng::rng(rng::mix(
                    rng::mix(spec.seed, rng::tag::FORGET_SHUFFLE),
                    epoch as u64,
                )));
            }
        }
        for chunk in order.chunks(spec.batch_size) {
            let batch = gather(data, chunk, spec.labels)?;
            let mut grads = model.backward(&batch)?;
            work += BACKWARD_UNITS * chunk.len() as u64;
            if let Some((_, beta)) = spec.neggrad {
                if beta < 1.0 {
                    let take = spec.batch_size.min(forget_cycle.len());
                    let mut ids = Vec::with_capacity(take);
                    for _ in 0..take {
                        ids.push(forget_cycle[forget_pos]);
                        forget_pos = (forget_pos + 1) % forget_cycle.len();
                    }
                    let fbatch = gather(data, &ids, spec.labels)?;
                    let fgrads = model.backward(&fbatch)?;
                    work += BACKWARD_UNITS * ids.len() as u64;
                    let mix_arrays = |g: &mut Vec<Vec<f64>>, f: &Vec<Vec<f64>>| {
                        for (gl, fl) in g.iter_mut().zip(f) {
                            for (gv, fv) in gl.iter_mut().zip(fl) {
                                *gv = beta * *gv - (1.0 - beta) * *fv;
                            }
                        }
                    };
                    mix_arrays(&mut grads.weights, &fgrads.weights);
                    mix_arrays(&mut grads.biases, &fgrads.biases);
                }
            }
            model.sgd_step(&grads, &hyper, spec.mask)?;
        }

        // post-epoch evaluation pass: divergence check + optional event row
        let batch = gather(data, &sorted_ids, spec.labels)?;
        let logits = model.forward(&batch)?;
        work += sorted_ids.len() as u64;
        if logits.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { epoch, loss: f64::NAN });
        }
        let (probs, mean_loss) = crate::nn::softmax_xent(&logits, batch.labels())?;
        if !mean_loss.is_finite() {
            return Err(Error::Diverged { epoch, loss: mean_loss });
        }
        if spec.record_events {
            let mut ev = EpochEvents {
                true_prob: Vec::with_capacity(sorted_ids.len()),
                max_prob: Vec::with_capacity(sorted_ids.len()),
                entropy: Vec::with_capacity(sorted_ids.len()),
                correct: Vec::with_capacity(sorted_ids.len()),
            };
            for (k, row) in probs.iter().enumerate() {
                let label = batch.labels()[k];
                ev.true_prob.push(row[label]);
                ev.max_prob.push(row.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
                let h: f64 = row.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
                ev.entropy.push(h);
                ev.correct.push(argmax(&logits[k]) == label);
            }
            events.push(ev);
        }
        if let Some(every) = spec.checkpoint_every {
            if (epoch + 1) % every == 0 || epoch + 1 == spec.epochs {
                checkpoints.push(model.clone());
            }
        }
    }
    Ok(LoopOut {
        events: EventLog { ids: sorted_ids, epochs: events },
        checkpoints,
        work_units: work,
    })
}

/// Trains `init` on the given subset of examples and logs per-epoch events.
pub fn train(init: ModelState, data: &Dataset, subset: &[usize], cfg: &TrainConfig) -> Result<TrainRun> {
    validate_config(cfg)?;
    let start = std::time::Instant::now();
    let mut model = init;
    let every = if cfg.collect_checkpoints { Some((cfg.epochs / 10).max(1)) } else { None };
    let out = run_loop(
        &mut model,
        data,
        &LoopSpec {
            subset,
            epochs: cfg.epochs,
            batch_size: cfg.batch_size,
            momentum: cfg.momentum,
            weight_decay: cfg.weight_decay,
            l1_gamma: 0.0,
            seed: cfg.seed,
            lr: &|e| lr_at(cfg, e),
            mask: None,
            neggrad: None,
            labels: None,
            record_events: true,
            checkpoint_every: every,
        },
    )?;
    Ok(TrainRun {
        model,
        events: out.events,
        checkpoints: out.checkpoints,
        timing: Timing::new(start.elapsed().as_secs_f64(), out.work_units),
    })
}

/// Fresh seeded init sized for the dataset, then `train`.
pub fn train_on(data: &Dataset, subset: &[usize], cfg: &TrainConfig) -> Result<TrainRun> {
    let mut dims = Vec::with_capacity(cfg.hidden_dims.len() + 2);
    dims.push(data.input_dim);
    dims.extend_from_slice(&cfg.hidden_dims);
    dims.push(data.n_classes);
    let init = ModelState::init(&dims, cfg.activation, cfg.seed)?;
    train(init, data, subset, cfg)
}

/// Fraction of the given examples the model labels correctly.
pub fn accuracy(model: &ModelState, data: &Dataset, ids: &[usize]) -> Result<f64> {
    let correct = correctness(model, data, ids)?;
    Ok(correct.iter().filter(|&&c| c).count() as f64 / correct.len() as f64)
}

/// Per-example correctness against the presented labels.
pub fn correctness(model: &ModelState, data: &Dataset, ids: &[usize]) -> Result<Vec<bool>> {
    if ids.is_empty() {
        return Err(Error::Validation("accuracy over an empty id set is undefined".into()));
    }
    let batch = data.batch(ids)?;
    let logits = model.forward(&batch)?;
    Ok(logits
        .iter()
        .zip(batch.labels())
        .map(|(row, &label)| argmax(row) == label)
        .collect())
}

/// Softmax class probabilities for the given examples.
pub fn class_probs(model: &ModelState, data: &Dataset, ids: &[usize]) -> Result<Vec<Vec<f64>>> {
    if ids.is_empty() {
        return Err(Error::Validation("cannot compute probabilities for zero ids".into()));
    }
    let batch = data.batch(ids)?;
    let logits = model.forward(&batch)?;
    let (probs, _) = crate::nn::softmax_xent(&logits, batch.labels())?;
    Ok(probs)
}
