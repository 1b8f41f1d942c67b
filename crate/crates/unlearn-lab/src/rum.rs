//! Refined sequential unlearning: partition the forget set by a memorization
//! signal and unlearn the chunks in ascending order, keeping not-yet-unlearned
//! chunks in the retain set. Includes the single-shot vanilla baseline, the
//! random-partition shuffle control, and the multi-step stability experiment.

use rand::seq::SliceRandom;
use sha2::{Digest, Sha256};

use crate::data::{select_forget, Band, Dataset, UnlearnTask};
use crate::error::{Error, Result};
use crate::eval::{evaluate, gini, EvalReport, MiaConfig};
use crate::memorization::{ScoreKind, ScoreTable};
use crate::proxies::{
    holdout_finetune_cfg, holdout_retraining_proxy, learning_event_proxies, loss_curvature_proxy,
    CurvatureConfig,
};
use crate::nn::ModelState;
use crate::rng;
use crate::timing::Timing;
use crate::trainer::{train_on, TrainConfig};
use crate::unlearn::{apply, UnlearnConfig};

/// SHA-256 over the sorted ids (8-byte little-endian each), hex-encoded.
pub fn ids_digest(ids: &[usize]) -> String {
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    let mut hasher = Sha256::new();
    for id in sorted {
        hasher.update((id as u64).to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

/// An ordered forget-set partition plus the algorithm applied per chunk.
#[derive(Debug, Clone)]
pub struct RumPlan {
    /// Disjoint chunks covering the forget set, least- to most-memorized by
    /// the refining score; ids sorted within each chunk.
    pub partition: Vec<Vec<usize>>,
    pub algorithm: UnlearnConfig,
}

impl RumPlan {
    pub fn k(&self) -> usize {
        self.partition.len()
    }
}

fn contiguous_chunks(order: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = order.len();
    let base = n / k;
    let extra = n % k;
    let mut chunks = Vec::with_capacity(k);
    let mut pos = 0;
    for i in 0..k {
        let size = base + usize::from(i < extra);
        let mut chunk: Vec<usize> = order[pos..pos + size].to_vec();
        chunk.sort_unstable();
        chunks.push(chunk);
        pos += size;
    }
    chunks
}

/// Sorts the forget set by memorization-aligned score ascending (ties by id)
/// and cuts it into `k` contiguous chunks whose sizes differ by at most one
/// (earlier chunks take the extra element).
pub fn refine(scores: &ScoreTable, task: &UnlearnTask, k: usize) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::Validation("k must be at least 1".into()));
    }
    if k > task.forget_ids.len() {
        return Err(Error::Validation(format!(
            "cannot split {} forget examples into {k} chunks",
            task.forget_ids.len()
        )));
    }
    let mut keyed = Vec::with_capacity(task.forget_ids.len());
    for &id in &task.forget_ids {
        match scores.aligned(id) {
            Some(s) => keyed.push((s, id)),
            None => {
                return Err(Error::Validation(format!(
                    "forget example {id} has no defined score"
                )))
            }
        }
    }
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let order: Vec<usize> = keyed.into_iter().map(|(_, id)| id).collect();
    Ok(contiguous_chunks(&order, k))
}

/// Uniformly random seeded K-partition of the forget set, sizes differing by
/// at most one.
pub(crate) fn random_partition(
    forget_ids: &[usize],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if k == 0 || k > forget_ids.len() {
        return Err(Error::Validation(format!(
            "cannot split {} forget examples into {k} chunks",
            forget_ids.len()
        )));
    }
    let mut order = forget_ids.to_vec();
    order.sort_unstable();
    order.shuffle(&mut rng::rng(rng::mix(seed, rng::tag::PARTITION)));
    Ok(contiguous_chunks(&order, k))
}

/// What one chunk-unlearning step did.
#[derive(Debug, Clone)]
pub struct RumStep {
    pub step: usize,
    pub forget_ids: Vec<usize>,
    pub forget_ids_digest: String,
    pub retain_len: usize,
    pub timing: Timing,
}

#[derive(Debug)]
pub struct RumOutcome {
    pub model: ModelState,
    pub steps: Vec<RumStep>,
    pub timing: Timing,
}

/// Applies the plan's algorithm chunk by chunk, least memorized first; the
/// retain set of step i is the true retain set plus all later chunks. Each
/// step derives its own seed from the algorithm seed and the step index.
/// `train_cfg` parameterizes the retrain oracle when the plan's algorithm is
/// `retrain`; other algorithms ignore it.
pub fn rum_f(
    original: &ModelState,
    data: &Dataset,
    task: &UnlearnTask,
    plan: &RumPlan,
    train_cfg: &TrainConfig,
) -> Result<RumOutcome> {
    if plan.partition.is_empty() {
        return Err(Error::Validation("plan has no chunks".into()));
    }
    let mut unclaimed: std::collections::BTreeSet<usize> =
        task.forget_ids.iter().copied().collect();
    for chunk in &plan.partition {
        if chunk.is_empty() {
            return Err(Error::Validation("plan contains an empty chunk".into()));
        }
        for id in chunk {
            if !unclaimed.remove(id) {
                return Err(Error::Validation(format!(
                    "chunk id {id} is not an unclaimed forget example"
                )));
            }
        }
    }
    if !unclaimed.is_empty() {
        return Err(Error::Validation("plan does not cover the forget set".into()));
    }
    let step_base = rng::mix(plan.algorithm.seed, rng::tag::RUM_STEP);
    let mut model = original.clone();
    let mut steps = Vec::with_capacity(plan.k());
    let mut total = Timing::default();
    for (i, chunk) in plan.partition.iter().enumerate() {
        // this step forgets chunk i against retain ∪ all later chunks
        let mut universe = task.retain_ids.clone();
        for later in &plan.partition[i..] {
            universe.extend_from_slice(later);
        }
        universe.sort_unstable();
        let step_task = UnlearnTask::new(&universe, chunk)?;
        let cfg =
            UnlearnConfig { seed: rng::mix(step_base, i as u64), ..plan.algorithm.clone() };
        let out = apply(&model, data, &step_task, &cfg, train_cfg)?;
        model = out.model;
        total += out.timing;
        steps.push(RumStep {
            step: i + 1,
            forget_ids: chunk.clone(),
            forget_ids_digest: ids_digest(chunk),
            retain_len: step_task.retain_ids.len(),
            timing: out.timing,
        });
    }
    Ok(RumOutcome { model, steps, timing: total })
}

/// Unlearns the whole forget set in one step: exactly the K=1 plan.
pub fn vanilla(
    original: &ModelState,
    data: &Dataset,
    task: &UnlearnTask,
    cfg: &UnlearnConfig,
    train_cfg: &TrainConfig,
) -> Result<RumOutcome> {
    let plan = RumPlan { partition: vec![task.forget_ids.clone()], algorithm: cfg.clone() };
    rum_f(original, data, task, &plan, train_cfg)
}

/// Sequential unlearning over a random partition instead of a refined one:
/// the control that isolates ordering from mere chunking.
pub fn shuffle_control(
    original: &ModelState,
    data: &Dataset,
    task: &UnlearnTask,
    cfg: &UnlearnConfig,
    k: usize,
    seed: u64,
    train_cfg: &TrainConfig,
) -> Result<RumOutcome> {
    if k < 2 {
        return Err(Error::Validation("shuffle control needs k >= 2".into()));
    }
    let plan = RumPlan {
        partition: random_partition(&task.forget_ids, k, seed)?,
        algorithm: cfg.clone(),
    };
    rum_f(original, data, task, &plan, train_cfg)
}

/// Settings for the multi-step stability experiment.
#[derive(Debug, Clone)]
pub struct SequentialConfig {
    pub n_steps: usize,
    /// Examples per score band; each step forgets 3·band_size examples
    /// (low, median, high bands).
    pub band_size: usize,
    /// Which proxy drives refinement and the Gini series (a proxy kind, not
    /// the ensemble memorization score).
    pub proxy: ScoreKind,
    /// Chunks per step on the refined track.
    pub k: usize,
    pub algorithm: UnlearnConfig,
    pub train: TrainConfig,
    pub curvature: CurvatureConfig,
    pub mia: MiaConfig,
    pub seed: u64,
}

/// One approach's result at one sequential step.
#[derive(Debug, Clone)]
pub struct SequentialStepRecord {
    pub step: usize,
    pub approach: &'static str,
    pub report: EvalReport,
    /// Gini of the recomputed proxy scores over the surviving train pool
    /// after this step.
    pub gini: f64,
    /// Unlearning cost of this step for this approach.
    pub wall_time_s: f64,
    pub forget_ids_digest: String,
}

#[derive(Debug)]
pub struct SequentialOutcome {
    /// Step-major records: refined track then vanilla track per step.
    pub records: Vec<SequentialStepRecord>,
    /// n_steps + 1 Gini values per track, starting with the shared value
    /// before any unlearning.
    pub gini_refined: Vec<f64>,
    pub gini_vanilla: Vec<f64>,
}

fn proxy_scores(
    kind: ScoreKind,
    model: &ModelState,
    pool: &[usize],
    data: &Dataset,
    cfg: &SequentialConfig,
    round: u64,
) -> Result<ScoreTable> {
    let train_seed = rng::mix(rng::mix(cfg.seed, rng::tag::TRAIN), round);
    let table = match kind {
        ScoreKind::Confidence
        | ScoreKind::MaxConfidence
        | ScoreKind::Entropy
        | ScoreKind::BinaryAccuracy => {
            // learning-event proxies need training dynamics: fresh run on
            // the current pool
            let run = train_on(data, pool, &TrainConfig { seed: train_seed, ..cfg.train.clone() })?;
            let tables = learning_event_proxies(&run.events)?;
            let mut found = tables.into_iter().find(|t| t.kind == kind).expect("kind produced");
            found.timing += run.timing;
            found
        }
        ScoreKind::HoldoutRetraining => {
            let ft =
                TrainConfig { seed: train_seed, ..holdout_finetune_cfg(&cfg.train) };
            holdout_retraining_proxy(model, data, &ft)?
        }
        ScoreKind::LossCurvature => {
            // no fresh training here: the current model is the lone checkpoint
            let ccfg = CurvatureConfig { seed: train_seed, ..cfg.curvature.clone() };
            loss_curvature_proxy(std::slice::from_ref(model), data, &ccfg)?
        }
        ScoreKind::Memorization => {
            return Err(Error::Validation(
                "sequential refinement expects a proxy kind, not the ensemble score".into(),
            ))
        }
    };
    table.restricted(pool)
}

struct TrackState {
    approach: &'static str,
    refined: bool,
    model: ModelState,
    pool: Vec<usize>,
    scores: ScoreTable,
    ginis: Vec<f64>,
    records: Vec<SequentialStepRecord>,
}

/// Runs `n_steps` rounds of select-forget → unlearn → evaluate → shrink-pool
/// on two independent tracks (refined K-chunk and vanilla single-shot),
/// recomputing the driving proxy and its Gini after every step. Each step is
/// scored against a retrained oracle on that step's retain set.
pub fn sequential_stability(
    data: &Dataset,
    original: &ModelState,
    cfg: &SequentialConfig,
) -> Result<SequentialOutcome> {
    if cfg.n_steps == 0 {
        return Err(Error::Validation("n_steps must be at least 1".into()));
    }
    if cfg.band_size == 0 {
        return Err(Error::Validation("band_size must be at least 1".into()));
    }
    let train_pool = data.train_ids();
    if 3 * cfg.band_size * cfg.n_steps >= train_pool.len() {
        return Err(Error::Validation(format!(
            "{} steps of {} forgotten examples would exhaust the {}-example train pool",
            cfg.n_steps,
            3 * cfg.band_size,
            train_pool.len()
        )));
    }
    let init_scores = proxy_scores(cfg.proxy, original, &train_pool, data, cfg, 0)?;
    let init_gini = gini(&init_scores.iter().map(|(_, s)| s).collect::<Vec<_>>())?;
    let mut tracks = [
        TrackState {
            approach: "rum_f",
            refined: true,
            model: original.clone(),
            pool: train_pool.clone(),
            scores: init_scores.clone(),
            ginis: vec![init_gini],
            records: Vec::new(),
        },
        TrackState {
            approach: "vanilla",
            refined: false,
            model: original.clone(),
            pool: train_pool,
            scores: init_scores,
            ginis: vec![init_gini],
            records: Vec::new(),
        },
    ];
    for step in 1..=cfg.n_steps {
        for track in &mut tracks {
            let task = select_forget(&track.scores, cfg.band_size, &[Band::Low, Band::Median, Band::High])?;
            let alg = UnlearnConfig {
                seed: rng::mix(rng::mix(cfg.seed, rng::tag::SEQ), step as u64),
                ..cfg.algorithm.clone()
            };
            let out = if track.refined {
                let partition = refine(&track.scores, &task, cfg.k)?;
                let plan = RumPlan { partition, algorithm: alg };
                rum_f(&track.model, data, &task, &plan, &cfg.train)?
            } else {
                vanilla(&track.model, data, &task, &alg, &cfg.train)?
            };
            let oracle_cfg = TrainConfig {
                seed: rng::mix(rng::mix(cfg.seed, rng::tag::ORACLE), step as u64),
                collect_checkpoints: false,
                ..cfg.train.clone()
            };
            let oracle = train_on(data, &task.retain_ids, &oracle_cfg)?;
            let mia = MiaConfig {
                seed: rng::mix(cfg.mia.seed, step as u64),
                n_samples: cfg.mia.n_samples,
            };
            let report = evaluate(&out.model, &oracle.model, data, &task, &mia)?;
            track.model = out.model;
            track.pool = task.retain_ids.clone();
            track.scores =
                proxy_scores(cfg.proxy, &track.model, &track.pool, data, cfg, step as u64)?;
            let g = gini(&track.scores.iter().map(|(_, s)| s).collect::<Vec<_>>())?;
            track.ginis.push(g);
            track.records.push(SequentialStepRecord {
                step,
                approach: track.approach,
                report,
                gini: g,
                wall_time_s: out.timing.report_seconds(),
                forget_ids_digest: ids_digest(&task.forget_ids),
            });
        }
    }
    let [refined, vanilla_track] = tracks;
    let mut records = Vec::with_capacity(2 * cfg.n_steps);
    for (a, b) in refined.records.into_iter().zip(vanilla_track.records) {
        records.push(a);
        records.push(b);
    }
    Ok(SequentialOutcome {
        records,
        gini_refined: refined.ginis,
        gini_vanilla: vanilla_track.ginis,
    })
}
