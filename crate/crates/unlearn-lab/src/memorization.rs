//! Per-example score tables and memorization estimators.
//!
//! A memorization score for example i is the gap between the probability the
//! model family predicts i's training label when i was in the training set
//! and when it was held out. The subsampled-ensemble estimator approximates
//! this with T models trained on random p-fraction subsets; the exact
//! leave-one-out variant retrains per example and is feasible only for tiny
//! datasets, which makes it the ground-truth oracle for the estimator.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::timing::Timing;
use crate::trainer::{self, TrainConfig};

/// What a score table measures. The alignment sign maps raw scores onto the
/// "higher = more memorized" axis: confidence-style metrics shrink with
/// memorization, divergence- and curvature-style metrics grow with it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScoreKind {
    Memorization,
    Confidence,
    MaxConfidence,
    Entropy,
    BinaryAccuracy,
    HoldoutRetraining,
    LossCurvature,
}

impl ScoreKind {
    /// +1 if larger raw scores mean more memorization, −1 if smaller do.
    pub fn alignment(self) -> f64 {
        match self {
            ScoreKind::Memorization
            | ScoreKind::HoldoutRetraining
            | ScoreKind::LossCurvature => 1.0,
            ScoreKind::Confidence
            | ScoreKind::MaxConfidence
            | ScoreKind::Entropy
            | ScoreKind::BinaryAccuracy => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScoreKind::Memorization => "memorization",
            ScoreKind::Confidence => "confidence",
            ScoreKind::MaxConfidence => "max_confidence",
            ScoreKind::Entropy => "entropy",
            ScoreKind::BinaryAccuracy => "binary_accuracy",
            ScoreKind::HoldoutRetraining => "holdout_retraining",
            ScoreKind::LossCurvature => "loss_curvature",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "memorization" => Some(ScoreKind::Memorization),
            "confidence" => Some(ScoreKind::Confidence),
            "max_confidence" => Some(ScoreKind::MaxConfidence),
            "entropy" => Some(ScoreKind::Entropy),
            "binary_accuracy" => Some(ScoreKind::BinaryAccuracy),
            "holdout_retraining" => Some(ScoreKind::HoldoutRetraining),
            "loss_curvature" => Some(ScoreKind::LossCurvature),
            _ => None,
        }
    }
}

/// Finite per-example scores of one kind, keyed by example id, plus the ids
/// the producer could not score and the cost of producing the table.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    pub kind: ScoreKind,
    entries: Vec<(usize, f64)>,
    pub undefined_ids: Vec<usize>,
    pub timing: Timing,
}

impl ScoreTable {
    pub fn new(
        kind: ScoreKind,
        mut entries: Vec<(usize, f64)>,
        mut undefined_ids: Vec<usize>,
        timing: Timing,
    ) -> Result<Self> {
        entries.sort_by_key(|&(id, _)| id);
        undefined_ids.sort_unstable();
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Validation("duplicate example id in score table".into()));
        }
        if let Some(&(id, s)) = entries.iter().find(|(_, s)| !s.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite score {s} for example {id}; report it as undefined instead"
            )));
        }
        if undefined_ids.iter().any(|id| entries.binary_search_by_key(id, |e| e.0).is_ok()) {
            return Err(Error::Validation("id listed both as scored and undefined".into()));
        }
        Ok(ScoreTable { kind, entries, undefined_ids, timing })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<f64> {
        self.entries
            .binary_search_by_key(&id, |e| e.0)
            .ok()
            .map(|i| self.entries[i].1)
    }

    /// Raw score times the kind's alignment sign ("higher = more memorized").
    pub fn aligned(&self, id: usize) -> Option<f64> {
        self.get(id).map(|s| s * self.kind.alignment())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    /// Keeps only the given ids; errs if any of them was never scored at all.
    pub fn restricted(&self, ids: &[usize]) -> Result<ScoreTable> {
        let mut entries = Vec::with_capacity(ids.len());
        let mut undefined = Vec::new();
        for &id in ids {
            match self.get(id) {
                Some(s) => entries.push((id, s)),
                None if self.undefined_ids.binary_search(&id).is_ok() => undefined.push(id),
                None => {
                    return Err(Error::Validation(format!(
                        "example {id} is absent from the score table"
                    )))
                }
            }
        }
        ScoreTable::new(self.kind, entries, undefined, self.timing)
    }

    /// CSV body: `example_id,kind,score,alignment` with a mandatory header.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("example_id,kind,score,alignment\n");
        let align = self.kind.alignment() as i64;
        for &(id, score) in &self.entries {
            out.push_str(&format!("{},{},{},{}\n", id, self.kind.name(), score, align));
        }
        out
    }

    pub fn from_csv_str(text: &str, timing: Timing) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::Artifact {
            path: "<score csv>".into(),
            message: format!("line {line}: {msg}"),
        };
        let mut kind: Option<ScoreKind> = None;
        let mut entries = Vec::new();
        let mut saw_header = false;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.starts_with('#') || line.is_empty() {
                continue;
            }
            if !saw_header {
                if line != "example_id,kind,score,alignment" {
                    return Err(bad(lineno, format!("unexpected header {line:?}")));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(bad(lineno, format!("expected 4 fields, got {}", fields.len())));
            }
            let id: usize = fields[0]
                .parse()
                .map_err(|_| bad(lineno, format!("bad example_id {:?}", fields[0])))?;
            let k = ScoreKind::parse(fields[1])
                .ok_or_else(|| bad(lineno, format!("unknown kind {:?}", fields[1])))?;
            if *kind.get_or_insert(k) != k {
                return Err(bad(lineno, "mixed score kinds in one table".into()));
            }
            let score: f64 = fields[2]
                .parse()
                .map_err(|_| bad(lineno, format!("bad score {:?}", fields[2])))?;
            let align: i64 = fields[3]
                .parse()
                .map_err(|_| bad(lineno, format!("bad alignment {:?}", fields[3])))?;
            if align as f64 != k.alignment() {
                return Err(bad(lineno, format!("alignment {align} contradicts kind {}", k.name())));
            }
            entries.push((id, score));
        }
        if !saw_header {
            return Err(bad(0, "missing header".into()));
        }
        let kind = kind.ok_or_else(|| bad(0, "empty score table".into()))?;
        ScoreTable::new(kind, entries, Vec::new(), timing)
    }
}

/// Subsampled-ensemble memorization estimator settings.
#[derive(Debug, Clone)]
pub struct MemConfig {
    /// Number of ensemble models (T).
    pub n_models: usize,
    /// Fraction of the train split each model sees (p).
    pub subset_fraction: f64,
    pub train: TrainConfig,
    pub seed: u64,
}

/// Estimates memorization for every train example from T models trained on
/// independent p-fraction subsets: in-subset mean correctness minus
/// out-of-subset mean correctness, in [−1, 1]. Examples with a zero in- or
/// out-count land in `undefined_ids`.
pub fn estimate_memorization(data: &Dataset, cfg: &MemConfig) -> Result<ScoreTable> {
    if cfg.n_models < 2 {
        return Err(Error::Validation("memorization estimator needs at least 2 models".into()));
    }
    if !(cfg.subset_fraction > 0.0 && cfg.subset_fraction < 1.0) {
        return Err(Error::Validation(format!(
            "subset_fraction must lie strictly between 0 and 1, got {}",
            cfg.subset_fraction
        )));
    }
    let train_ids = data.train_ids();
    let n = train_ids.len();
    let subset_size = ((cfg.subset_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let start = std::time::Instant::now();

    // One pass per ensemble member: which examples it saw, which it got right.
    // Members are independent, so this fans out; results are merged in model
    // order, keeping the arithmetic identical at any thread count.
    let per_model: Vec<Result<(Vec<bool>, Vec<bool>, u64)>> = crate::par_map(cfg.n_models, |t| {
        let subset_seed = rng::mix(rng::mix(cfg.seed, rng::tag::MEM_SUBSET), t as u64);
        let subset = sample_without_replacement(&train_ids, subset_size, subset_seed);
        let mut train_cfg = cfg.train.clone();
        train_cfg.seed = rng::mix(rng::mix(cfg.seed, rng::tag::MEM_TRAIN), t as u64);
        let run = trainer::train_on(data, &subset, &train_cfg)?;
        let correct = trainer::correctness(&run.model, data, &train_ids)?;
        let mut included = vec![false; n];
        for &id in &subset {
            included[train_ids.binary_search(&id).unwrap()] = true;
        }
        Ok((included, correct, run.timing.work_units + train_ids.len() as u64))
    });

    let mut in_correct = vec![0u32; n];
    let mut in_count = vec![0u32; n];
    let mut out_correct = vec![0u32; n];
    let mut out_count = vec![0u32; n];
    let mut work = 0u64;
    for res in per_model {
        let (included, correct, units) = res?;
        work += units;
        for i in 0..n {
            if included[i] {
                in_count[i] += 1;
                in_correct[i] += correct[i] as u32;
            } else {
                out_count[i] += 1;
                out_correct[i] += correct[i] as u32;
            }
        }
    }

    let mut entries = Vec::with_capacity(n);
    let mut undefined = Vec::new();
    for i in 0..n {
        if in_count[i] == 0 || out_count[i] == 0 {
            undefined.push(train_ids[i]);
        } else {
            let score = in_correct[i] as f64 / in_count[i] as f64
                - out_correct[i] as f64 / out_count[i] as f64;
            entries.push((train_ids[i], score));
        }
    }
    let timing = Timing::new(start.elapsed().as_secs_f64(), work);
    ScoreTable::new(ScoreKind::Memorization, entries, undefined, timing)
}

/// Exact leave-one-out memorization, averaged over S seeds. Retrains n+1
/// models per seed, so the train split is capped at 64 examples.
pub fn exact_loo(data: &Dataset, train_cfg: &TrainConfig, n_seeds: usize, seed: u64) -> Result<ScoreTable> {
    let train_ids = data.train_ids();
    let n = train_ids.len();
    if n > 64 {
        return Err(Error::Validation(format!(
            "exact leave-one-out is capped at 64 train examples, got {n}"
        )));
    }
    if n < 2 {
        return Err(Error::Validation("leave-one-out needs at least 2 train examples".into()));
    }
    if n_seeds < 10 {
        return Err(Error::Validation(format!(
            "leave-one-out needs at least 10 seeds for a stable mean, got {n_seeds}"
        )));
    }
    let start = std::time::Instant::now();

    let per_seed: Vec<Result<(Vec<bool>, Vec<bool>, u64)>> = crate::par_map(n_seeds, |s| {
        let mut work = 0u64;
        let mut full_cfg = train_cfg.clone();
        full_cfg.seed = rng::mix(rng::mix(seed, rng::tag::LOO), s as u64);
        let full_run = trainer::train_on(data, &train_ids, &full_cfg)?;
        work += full_run.timing.work_units;
        let full_correct = trainer::correctness(&full_run.model, data, &train_ids)?;
        work += n as u64;
        let mut loo_correct = vec![false; n];
        for i in 0..n {
            let held_out = train_ids[i];
            let rest: Vec<usize> = train_ids.iter().copied().filter(|&id| id != held_out).collect();
            let mut cfg = train_cfg.clone();
            cfg.seed = rng::mix(full_cfg.seed, i as u64);
            let run = trainer::train_on(data, &rest, &cfg)?;
            work += run.timing.work_units;
            loo_correct[i] = trainer::correctness(&run.model, data, &[held_out])?[0];
            work += 1;
        }
        Ok((full_correct, loo_correct, work))
    });

    let mut in_sum = vec![0u32; n];
    let mut out_sum = vec![0u32; n];
    let mut work = 0u64;
    for res in per_seed {
        let (full, loo, units) = res?;
        work += units;
        for i in 0..n {
            in_sum[i] += full[i] as u32;
            out_sum[i] += loo[i] as u32;
        }
    }
    let entries: Vec<(usize, f64)> = (0..n)
        .map(|i| {
            let score = in_sum[i] as f64 / n_seeds as f64 - out_sum[i] as f64 / n_seeds as f64;
            (train_ids[i], score)
        })
        .collect();
    let timing = Timing::new(start.elapsed().as_secs_f64(), work);
    ScoreTable::new(ScoreKind::Memorization, entries, Vec::new(), timing)
}

/// Draws `k` distinct elements of `pool`, deterministically from `seed`.
pub(crate) fn sample_without_replacement(pool: &[usize], k: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut scratch: Vec<usize> = pool.to_vec();
    let mut r = rng::rng(seed);
    scratch.shuffle(&mut r);
    let mut picked: Vec<usize> = scratch[..k].to_vec();
    picked.sort_unstable();
    picked
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::timing::Timing;

    fn table(kind: ScoreKind, entries: Vec<(usize, f64)>) -> ScoreTable {
        ScoreTable::new(kind, entries, Vec::new(), Timing::default()).unwrap()
    }

    #[test]
    fn alignment_signs_are_fixed() {
        assert_eq!(ScoreKind::Memorization.alignment(), 1.0);
        assert_eq!(ScoreKind::HoldoutRetraining.alignment(), 1.0);
        assert_eq!(ScoreKind::LossCurvature.alignment(), 1.0);
        assert_eq!(ScoreKind::Confidence.alignment(), -1.0);
        assert_eq!(ScoreKind::MaxConfidence.alignment(), -1.0);
        assert_eq!(ScoreKind::Entropy.alignment(), -1.0);
        assert_eq!(ScoreKind::BinaryAccuracy.alignment(), -1.0);
    }

    #[test]
    fn score_table_rejects_duplicates_and_nan() {
        assert!(ScoreTable::new(
            ScoreKind::Confidence,
            vec![(1, 0.5), (1, 0.7)],
            vec![],
            Timing::default()
        )
        .is_err());
        assert!(ScoreTable::new(
            ScoreKind::Confidence,
            vec![(1, f64::NAN)],
            vec![],
            Timing::default()
        )
        .is_err());
        assert!(ScoreTable::new(
            ScoreKind::Confidence,
            vec![(1, 0.5)],
            vec![1],
            Timing::default()
        )
        .is_err());
    }

    #[test]
    fn aligned_flips_sign_for_confidence_kinds() {
        let t = table(ScoreKind::Confidence, vec![(0, 0.9), (1, 0.1)]);
        assert_eq!(t.aligned(0), Some(-0.9));
        let m = table(ScoreKind::Memorization, vec![(0, 0.9)]);
        assert_eq!(m.aligned(0), Some(0.9));
    }

    #[test]
    fn csv_round_trip_preserves_scores_exactly() {
        let t = table(
            ScoreKind::HoldoutRetraining,
            vec![(3, 0.8788898014442294), (7, 1e-12), (9, 0.0)],
        );
        let csv = t.to_csv_string();
        let back = ScoreTable::from_csv_str(&csv, Timing::default()).unwrap();
        assert_eq!(back.kind, ScoreKind::HoldoutRetraining);
        for (id, s) in t.iter() {
            assert_eq!(back.get(id).unwrap().to_bits(), s.to_bits());
        }
    }

    #[test]
    fn csv_rejects_mixed_kinds_and_bad_alignment() {
        let text = "example_id,kind,score,alignment\n0,confidence,0.5,-1\n1,entropy,0.2,-1\n";
        assert!(ScoreTable::from_csv_str(text, Timing::default()).is_err());
        let text = "example_id,kind,score,alignment\n0,confidence,0.5,1\n";
        assert!(ScoreTable::from_csv_str(text, Timing::default()).is_err());
        assert!(ScoreTable::from_csv_str("", Timing::default()).is_err());
    }
}
