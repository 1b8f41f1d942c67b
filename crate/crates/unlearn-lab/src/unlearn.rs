//! Unlearning algorithms: the retrain-from-scratch oracle plus four
//! approximate methods (fine-tune, NegGrad+, L1-sparse fine-tune, SalUn).
//!
//! All four approximate methods are one shared SGD loop with different
//! switches thrown, so their reduction identities (NegGrad+ at β=1 and
//! L1-sparse at γ=0 both equal plain fine-tuning) hold bit-for-bit.

use std::collections::BTreeMap;

use rand::Rng;

use crate::data::{Dataset, UnlearnTask};
use crate::error::{Error, Result};
use crate::nn::{ModelState, ParamMask};
use crate::rng;
use crate::timing::{Timing, BACKWARD_UNITS};
use crate::trainer::{self, LoopSpec, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Retrain,
    FineTune,
    NegGradPlus,
    L1Sparse,
    Salun,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Retrain => "retrain",
            Algorithm::FineTune => "fine_tune",
            Algorithm::NegGradPlus => "neggrad_plus",
            Algorithm::L1Sparse => "l1_sparse",
            Algorithm::Salun => "salun",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "retrain" => Some(Algorithm::Retrain),
            "fine_tune" => Some(Algorithm::FineTune),
            "neggrad_plus" => Some(Algorithm::NegGradPlus),
            "l1_sparse" => Some(Algorithm::L1Sparse),
            "salun" => Some(Algorithm::Salun),
            _ => None,
        }
    }
}

/// Settings shared by the approximate unlearning methods. `beta` only
/// matters to NegGrad+, `gamma` to L1-sparse, `sparsity_ratio` to SalUn.
#[derive(Debug, Clone, PartialEq)]
pub struct UnlearnConfig {
    pub algorithm: Algorithm,
    pub epochs: usize,
    pub lr: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sparsity_ratio: f64,
    pub batch_size: usize,
    pub momentum: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for UnlearnConfig {
    fn default() -> Self {
        UnlearnConfig {
            algorithm: Algorithm::FineTune,
            epochs: 5,
            lr: 0.01,
            beta: 0.99,
            gamma: 1e-4,
            sparsity_ratio: 0.5,
            batch_size: 64,
            momentum: 0.9,
            weight_decay: 0.0,
            seed: 1,
        }
    }
}

/// An unlearned model plus what it cost to produce.
#[derive(Debug)]
pub struct UnlearnOutcome {
    pub model: ModelState,
    pub timing: Timing,
}

/// The per-step NegGrad+ objective: β·L_retain − (1−β)·L_forget.
pub fn neggrad_objective(beta: f64, retain_loss: f64, forget_loss: f64) -> f64 {
    beta * retain_loss - (1.0 - beta) * forget_loss
}

fn validate(cfg: &UnlearnConfig) -> Result<()> {
    if !(cfg.lr.is_finite() && cfg.lr > 0.0) {
        return Err(Error::Validation(format!("lr must be positive, got {}", cfg.lr)));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Validation("batch_size must be positive".into()));
    }
    if !(0.0..1.0).contains(&cfg.momentum) {
        return Err(Error::Validation(format!("momentum must lie in [0,1), got {}", cfg.momentum)));
    }
    if !(cfg.weight_decay >= 0.0) {
        return Err(Error::Validation("weight_decay must be non-negative".into()));
    }
    match cfg.algorithm {
        Algorithm::NegGradPlus if !(0.5..=1.0).contains(&cfg.beta) => {
            Err(Error::Validation(format!("beta must lie in [0.5, 1], got {}", cfg.beta)))
        }
        Algorithm::L1Sparse if !(cfg.gamma >= 0.0 && cfg.gamma.is_finite()) => {
            Err(Error::Validation(format!("gamma must be non-negative, got {}", cfg.gamma)))
        }
        Algorithm::Salun if !(cfg.sparsity_ratio > 0.0 && cfg.sparsity_ratio < 1.0) => {
            Err(Error::Validation(format!(
                "sparsity_ratio must lie in (0,1), got {}",
                cfg.sparsity_ratio
            )))
        }
        _ => Ok(()),
    }
}

/// Dispatches to the configured algorithm. `train_cfg` supplies the full
/// training procedure for the retrain oracle (re-seeded with `cfg.seed`) and
/// is ignored by the approximate methods.
pub fn apply(
    original: &ModelState,
    data: &Dataset,
    task: &UnlearnTask,
    cfg: &UnlearnConfig,
    train_cfg: &TrainConfig,
) -> Result<UnlearnOutcome> {
    match cfg.algorithm {
        Algorithm::Retrain => {
            let seeded = TrainConfig { seed: cfg.seed, ..train_cfg.clone() };
            retrain(data, task, &seeded)
        }
        Algorithm::FineTune => fine_tune(original, data, task, cfg),
        Algorithm::NegGradPlus => neggrad_plus(original, data, task, cfg),
        Algorithm::L1Sparse => l1_sparse(original, data, task, cfg),
        Algorithm::Salun => salun(original, data, task, cfg),
    }
}

/// Trains a fresh model on the retain set only, with the full procedure.
pub fn retrain(data: &Dataset, task: &UnlearnTask, train_cfg: &TrainConfig) -> Result<UnlearnOutcome> {
    let cfg = TrainConfig { collect_checkpoints: false, ..train_cfg.clone() };
    let run = trainer::train_on(data, &task.retain_ids, &cfg)?;
    Ok(UnlearnOutcome { model: run.model, timing: run.timing })
}

struct FineTuneExtras<'a> {
    l1_gamma: f64,
    mask: Option<&'a ParamMask>,
    neggrad: Option<(&'a [usize], f64)>,
    labels: Option<&'a BTreeMap<usize, usize>>,
    extra_work: u64,
}

fn run_finetune(
    original: &ModelState,
    data: &Dataset,
    subset: &[usize],
    cfg: &UnlearnConfig,
    extras: FineTuneExtras,
) -> Result<UnlearnOutcome> {
    validate(cfg)?;
    let start = std::time::Instant::now();
    let mut model = original.clone();
    let mut work = extras.extra_work;
    if cfg.epochs > 0 {
        let out = trainer::run_loop(
            &mut model,
            data,
            &LoopSpec {
                subset,
                epochs: cfg.epochs,
                batch_size: cfg.batch_size,
                momentum: cfg.momentum,
                weight_decay: cfg.weight_decay,
                l1_gamma: extras.l1_gamma,
                seed: cfg.seed,
                lr: &|_| cfg.lr,
                mask: extras.mask,
                neggrad: extras.neggrad,
                labels: extras.labels,
                record_events: false,
                checkpoint_every: None,
            },
        )?;
        work += out.work_units;
    }
    Ok(UnlearnOutcome { model, timing: Timing::new(start.elapsed().as_secs_f64(), work) })
}

/// Continues training the original model on the retain set, relying on
/// catastrophic forgetting of the forget set.
pub fn fine_tune(
    original: &ModelState,
    data: &Dataset,
    task: &UnlearnTask,
    cfg: &UnlearnConfig,
) -> Result<UnlearnOutcome> {
    run_finetune(
        original,
        data,
        &task.retain_ids,
        cfg,
        FineTuneExtras { l1_gamma: 0.0, mask: None, neggrad: None, labels: None, extra_work: 0 },
    )
}

/// Descends β·L(retain batch) − (1−β)·L(forget batch); forget batches cycle
/// from their own shuffle stream alongside the retain batches.
pub fn neggrad_plus(
    original: &ModelState,
    data: &Dataset,
    task: &UnlearnTask,
    cfg: &UnlearnConfig,
) -> Result<UnlearnOutcome> {
    run_finetune(
        original,
        data,
        &task.retain_ids,
        cfg,
        FineTuneExtras {
            l1_gamma: 0.0,
            mask: None,
            neggrad: Some((&task.forget_ids, cfg.beta)),
            labels: None,
            extra_work: 0,
        },
    )
}

/// Fine-tuning with an L1 weight penalty active in every step.
pub fn l1_sparse(
    original: &ModelState,
    data: &Dataset,
    task: &UnlearnTask,
    cfg: &UnlearnConfig,
) -> Result<UnlearnOutcome> {
    run_finetune(
        original,
        data,
        &task.retain_ids,
        cfg,
        FineTuneExtras {
            l1_gamma: cfg.gamma,
            mask: None,
            neggrad: None,
            labels: None,
            extra_work: 0,
        },
    )
}

/// Random replacement label for each forget example, drawn uniformly from the
/// classes other than the presented one and fixed per example by the seed.
pub(crate) fn random_relabel(
    data: &Dataset,
    forget_ids: &[usize],
    seed: u64,
) -> BTreeMap<usize, usize> {
    let base = rng::mix(seed, rng::tag::RELABEL);
    forget_ids
        .iter()
        .map(|&id| {
            let presented = data.example(id).label;
            let mut r = rng::rng(rng::mix(base, id as u64));
            let draw = r.gen_range(0..data.n_classes - 1);
            let label = if draw >= presented { draw + 1 } else { draw };
            (id, label)
        })
        .collect()
}

/// Parameter mask enabling the `ceil(ratio · n_params)` entries with the
/// largest absolute forget-set gradient at the original model. Ties at the
/// threshold break toward earlier layers and lower indices.
pub(crate) fn saliency_mask(
    original: &ModelState,
    data: &Dataset,
    forget_ids: &[usize],
    ratio: f64,
) -> Result<ParamMask> {
    let batch = data.batch(forget_ids)?;
    let grads = original.backward(&batch)?;
    let n_params = original.n_params();
    let k = (ratio * n_params as f64).ceil() as usize;
    // (saliency, arrays index, layer, flat position); arrays 0 = weights
    let mut entries: Vec<(f64, usize, usize, usize)> = Vec::with_capacity(n_params);
    for (l, layer) in grads.weights.iter().enumerate() {
        for (i, &g) in layer.iter().enumerate() {
            entries.push((g.abs(), 0, l, i));
        }
    }
    for (l, layer) in grads.biases.iter().enumerate() {
        for (i, &g) in layer.iter().enumerate() {
            entries.push((g.abs(), 1, l, i));
        }
    }
    entries.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    let mut mask = ParamMask {
        weights: grads.weights.iter().map(|l| vec![false; l.len()]).collect(),
        biases: grads.biases.iter().map(|l| vec![false; l.len()]).collect(),
    };
    for &(_, which, l, i) in entries.iter().take(k) {
        if which == 0 {
            mask.weights[l][i] = true;
        } else {
            mask.biases[l][i] = true;
        }
    }
    Ok(mask)
}

/// Saliency-masked random-label fine-tuning: only the parameters most
/// sensitive to the forget set may move, and the forget examples are
/// presented with random wrong labels among the retain set.
pub fn salun(
    original: &ModelState,
    data: &Dataset,
    task: &UnlearnTask,
    cfg: &UnlearnConfig,
) -> Result<UnlearnOutcome> {
    validate(cfg)?;
    let mask = saliency_mask(original, data, &task.forget_ids, cfg.sparsity_ratio)?;
    let labels = random_relabel(data, &task.forget_ids, cfg.seed);
    let mut subset = task.retain_ids.clone();
    subset.extend_from_slice(&task.forget_ids);
    subset.sort_unstable();
    run_finetune(
        original,
        data,
        &subset,
        cfg,
        FineTuneExtras {
            l1_gamma: 0.0,
            mask: Some(&mask),
            neggrad: None,
            labels: Some(&labels),
            // the saliency pass is one backward over the forget set
            extra_work: BACKWARD_UNITS * task.forget_ids.len() as u64,
        },
    )
}
