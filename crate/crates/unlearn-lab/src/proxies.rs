//! Cheap per-example memorization proxies and their fidelity profile against
//! the subsampled-ensemble memorization score.
//!
//! Four proxies fall out of the training event log for free (confidence,
//! max-confidence, entropy, binary accuracy, each averaged over epochs). Two
//! cost extra model work: symmetric KL against a copy fine-tuned on the
//! holdout split, and input-space loss curvature probed at checkpoints.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::memorization::{ScoreKind, ScoreTable};
use crate::nn::ModelState;
use crate::rng;
use crate::timing::Timing;
use crate::trainer::{self, EventLog, LoopSpec, Schedule, TrainConfig};

/// Per-example mean over epochs of each logged training metric, as four
/// score tables: confidence, max_confidence, entropy, binary_accuracy.
pub fn learning_event_proxies(log: &EventLog) -> Result<Vec<ScoreTable>> {
    if log.ids.is_empty() || log.epochs.is_empty() {
        return Err(Error::Validation("event log is empty".into()));
    }
    let start = std::time::Instant::now();
    let n = log.ids.len();
    let n_epochs = log.epochs.len() as f64;
    let mut sums = vec![[0.0f64; 4]; n];
    for ev in &log.epochs {
        for k in 0..n {
            sums[k][0] += ev.true_prob[k];
            sums[k][1] += ev.max_prob[k];
            sums[k][2] += ev.entropy[k];
            sums[k][3] += ev.correct[k] as u8 as f64;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    // each table is one scan of the epochs × examples log
    let timing = Timing::new(elapsed, (log.epochs.len() * n) as u64);
    let kinds = [
        ScoreKind::Confidence,
        ScoreKind::MaxConfidence,
        ScoreKind::Entropy,
        ScoreKind::BinaryAccuracy,
    ];
    kinds
        .iter()
        .enumerate()
        .map(|(m, &kind)| {
            let entries = log
                .ids
                .iter()
                .enumerate()
                .map(|(k, &id)| (id, sums[k][m] / n_epochs))
                .collect();
            ScoreTable::new(kind, entries, Vec::new(), timing)
        })
        .collect()
}

/// KL(p‖q) + KL(q‖p) with probabilities floored at 1e-12 before the logs.
pub fn symmetric_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            let a = a.max(1e-12);
            let b = b.max(1e-12);
            a * (a / b).ln() + b * (b / a).ln()
        })
        .sum()
}

/// Fine-tune settings derived from a training config: two epochs on the
/// holdout split at a tenth of the base learning rate, constant schedule.
pub fn holdout_finetune_cfg(train: &TrainConfig) -> TrainConfig {
    TrainConfig {
        epochs: 2,
        base_lr: train.base_lr / 10.0,
        schedule: Schedule::Constant,
        collect_checkpoints: false,
        ..train.clone()
    }
}

/// Scores every train example by how much a light fine-tune on the holdout
/// split moves the model's predictive distribution for it: symmetric KL
/// between the softmax outputs of `model` and the fine-tuned copy.
pub fn holdout_retraining_proxy(
    model: &ModelState,
    data: &Dataset,
    finetune: &TrainConfig,
) -> Result<ScoreTable> {
    let holdout = data.test_ids();
    if holdout.is_empty() {
        return Err(Error::Validation("holdout split is empty".into()));
    }
    if finetune.epochs > 0 && !(finetune.base_lr.is_finite() && finetune.base_lr > 0.0) {
        return Err(Error::Validation(format!(
            "fine-tune learning rate must be positive, got {}",
            finetune.base_lr
        )));
    }
    let start = std::time::Instant::now();
    let mut tuned = model.clone();
    let mut work = 0u64;
    if finetune.epochs > 0 {
        let out = trainer::run_loop(
            &mut tuned,
            data,
            &LoopSpec {
                subset: &holdout,
                epochs: finetune.epochs,
                batch_size: finetune.batch_size,
                momentum: finetune.momentum,
                weight_decay: finetune.weight_decay,
                l1_gamma: 0.0,
                seed: rng::mix(finetune.seed, rng::tag::HOLDOUT),
                lr: &|e| trainer::lr_at(finetune, e),
                mask: None,
                neggrad: None,
                labels: None,
                record_events: false,
                checkpoint_every: None,
            },
        )?;
        work += out.work_units;
    }
    let train_ids = data.train_ids();
    let p = trainer::class_probs(model, data, &train_ids)?;
    let q = trainer::class_probs(&tuned, data, &train_ids)?;
    work += 2 * train_ids.len() as u64;
    let entries = train_ids
        .iter()
        .enumerate()
        .map(|(k, &id)| (id, symmetric_kl(&p[k], &q[k])))
        .collect();
    let timing = Timing::new(start.elapsed().as_secs_f64(), work);
    ScoreTable::new(ScoreKind::HoldoutRetraining, entries, Vec::new(), timing)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureConfig {
    /// Number of ±1 probe directions per example and checkpoint.
    pub n_probes: usize,
    /// Finite-difference step along each probe.
    pub step: f64,
    pub seed: u64,
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        CurvatureConfig { n_probes: 2, step: 1e-3, seed: 1 }
    }
}

/// Mean over `n_probes` sign-random directions v of ‖g(x+h·v) − g(x)‖₂ / h.
/// Exact for gradients linear in x (the step h cancels), which is what the
/// unit oracle checks.
pub(crate) fn probe_curvature(
    grad: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    x: &[f64],
    n_probes: usize,
    step: f64,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let g0 = grad(x)?;
    let mut acc = 0.0;
    for _ in 0..n_probes {
        let shifted: Vec<f64> = x
            .iter()
            .map(|&xi| xi + step * if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let g1 = grad(&shifted)?;
        let dist = g1
            .iter()
            .zip(&g0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        acc += dist / step;
    }
    Ok(acc / n_probes as f64)
}

/// Scores every train example by input-space loss curvature: probe-direction
/// gradient differences, averaged over probes and over the given training
/// checkpoints. Each example draws probes from its own derived stream, so the
/// result is independent of iteration order.
pub fn loss_curvature_proxy(
    checkpoints: &[ModelState],
    data: &Dataset,
    cfg: &CurvatureConfig,
) -> Result<ScoreTable> {
    if checkpoints.is_empty() {
        return Err(Error::Validation("curvature needs at least one checkpoint".into()));
    }
    if cfg.n_probes == 0 {
        return Err(Error::Validation("n_probes must be positive".into()));
    }
    if !(cfg.step.is_finite() && cfg.step > 0.0) {
        return Err(Error::Validation(format!("probe step must be positive, got {}", cfg.step)));
    }
    let start = std::time::Instant::now();
    let ids = data.train_ids();
    let base = rng::mix(cfg.seed, rng::tag::PROBE);
    let scores: Vec<Result<f64>> = crate::par_map(ids.len(), |k| {
        let id = ids[k];
        let ex = data.example(id);
        let mut stream = rng::rng(rng::mix(base, id as u64));
        let mut total = 0.0;
        for ckpt in checkpoints {
            let mut grad = |x: &[f64]| ckpt.input_gradient(x, ex.label);
            total += probe_curvature(&mut grad, &ex.features, cfg.n_probes, cfg.step, &mut stream)?;
        }
        Ok(total / checkpoints.len() as f64)
    });
    let mut entries = Vec::with_capacity(ids.len());
    for (k, s) in scores.into_iter().enumerate() {
        entries.push((ids[k], s?));
    }
    // each input_gradient is a forward plus a backward over one example, and
    // every (example, checkpoint) pair costs 1 base + n_probes shifted calls
    let per_pair = 4 * (1 + cfg.n_probes as u64);
    let work = ids.len() as u64 * checkpoints.len() as u64 * per_pair;
    let timing = Timing::new(start.elapsed().as_secs_f64(), work);
    ScoreTable::new(ScoreKind::LossCurvature, entries, Vec::new(), timing)
}

/// 1-based ranks with ties assigned the average rank of their group.
pub(crate) fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap().then(i.cmp(&j)));
    let mut ranks = vec![0.0; n];
    let mut k = 0;
    while k < n {
        let mut j = k;
        while j + 1 < n && values[idx[j + 1]] == values[idx[k]] {
            j += 1;
        }
        let avg = (k + j) as f64 / 2.0 + 1.0;
        for t in k..=j {
            ranks[idx[t]] = avg;
        }
        k = j + 1;
    }
    ranks
}

/// Spearman rank correlation over the ids scored in both tables (average
/// ranks for ties). Ids undefined in either table are excluded pairwise.
pub fn spearman(a: &ScoreTable, b: &ScoreTable) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (id, va) in a.iter() {
        if let Some(vb) = b.get(id) {
            xs.push(va);
            ys.push(vb);
        }
    }
    if xs.len() < 3 {
        return Err(Error::Validation(format!(
            "spearman needs at least 3 common ids, found {}",
            xs.len()
        )));
    }
    let rx = average_ranks(&xs);
    let ry = average_ranks(&ys);
    // identical or exactly reversed rank vectors are ±1 by definition;
    // answering exactly avoids rounding noise in the Pearson arithmetic
    let n = rx.len() as f64;
    if rx == ry {
        return Ok(1.0);
    }
    if rx.iter().zip(&ry).all(|(a, b)| a + b == n + 1.0) {
        return Ok(-1.0);
    }
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for k in 0..rx.len() {
        let dx = rx[k] - mx;
        let dy = ry[k] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::Validation(
            "rank correlation is undefined when one input is constant".into(),
        ));
    }
    Ok((cov / (vx.sqrt() * vy.sqrt())).clamp(-1.0, 1.0))
}

/// One fidelity-table row: how faithful and how cheap a proxy is.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FidelityRow {
    pub proxy: String,
    pub spearman_vs_mem: f64,
    pub wall_time_s: f64,
    pub pct_of_mem_time: f64,
    pub pct_of_retrain_time: f64,
}

/// Per proxy: Spearman against the memorization table plus cost relative to
/// the memorization estimate and to one retraining run.
pub fn fidelity_report(
    mem: &ScoreTable,
    proxies: &[ScoreTable],
    retrain_time: Timing,
) -> Result<Vec<FidelityRow>> {
    if mem.kind != ScoreKind::Memorization {
        return Err(Error::Validation(format!(
            "fidelity baseline must be a memorization table, got {}",
            mem.kind.name()
        )));
    }
    let mem_s = mem.timing.report_seconds();
    let retrain_s = retrain_time.report_seconds();
    if mem_s <= 0.0 || retrain_s <= 0.0 {
        return Err(Error::Validation("reference timings must be positive".into()));
    }
    proxies
        .iter()
        .map(|p| {
            Ok(FidelityRow {
                proxy: p.kind.name().to_string(),
                spearman_vs_mem: spearman(p, mem)?,
                wall_time_s: p.timing.report_seconds(),
                pct_of_mem_time: 100.0 * p.timing.report_seconds() / mem_s,
                pct_of_retrain_time: 100.0 * p.timing.report_seconds() / retrain_s,
            })
        })
        .collect()
}

/// CSV for fidelity rows, one line per proxy.
pub fn fidelity_csv(rows: &[FidelityRow]) -> String {
    let mut out =
        String::from("proxy,spearman_vs_mem,wall_time_s,pct_of_mem_time,pct_of_retrain_time\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.proxy, r.spearman_vs_mem, r.wall_time_s, r.pct_of_mem_time, r.pct_of_retrain_time
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_dataset, DatasetConfig};
    use crate::nn::Activation;
    use crate::trainer::{train_on, EpochEvents};

    fn blobs() -> Dataset {
        make_dataset(&DatasetConfig {
            n_classes: 2,
            n_train: 60,
            n_test: 30,
            input_dim: 4,
            atypical_fraction: 0.0,
            noise_fraction: 0.0,
            seed: 11,
        })
        .unwrap()
    }

    fn quick_cfg() -> TrainConfig {
        TrainConfig {
            hidden_dims: vec![12],
            epochs: 8,
            batch_size: 16,
            base_lr: 0.05,
            seed: 5,
            ..Default::default()
        }
    }

    fn hand_log() -> EventLog {
        // three examples, three epochs with hand-picked metrics
        let mk = |tp: [f64; 3], mp: [f64; 3], h: [f64; 3], c: [bool; 3]| EpochEvents {
            true_prob: tp.to_vec(),
            max_prob: mp.to_vec(),
            entropy: h.to_vec(),
            correct: c.to_vec(),
        };
        EventLog {
            ids: vec![0, 1, 2],
            epochs: vec![
                mk([0.2, 1.0, 0.1], [0.6, 1.0, 0.5], [0.3, 0.0, 2.0], [false, true, false]),
                mk([0.4, 1.0, 0.1], [0.7, 1.0, 0.5], [0.2, 0.0, 2.0], [true, true, false]),
                mk([0.9, 1.0, 0.1], [0.9, 1.0, 0.5], [0.1, 0.0, 2.0], [true, true, true]),
            ],
        }
    }

    #[test]
    fn event_proxies_are_epoch_means() {
        let tables = learning_event_proxies(&hand_log()).unwrap();
        assert_eq!(tables.len(), 4);
        let by = |k: ScoreKind| tables.iter().find(|t| t.kind == k).unwrap();
        let conf = by(ScoreKind::Confidence);
        assert!((conf.get(0).unwrap() - 0.5).abs() < 1e-15); // mean of .2 .4 .9
        assert_eq!(conf.get(1).unwrap(), 1.0);
        let acc = by(ScoreKind::BinaryAccuracy);
        assert_eq!(acc.get(1).unwrap(), 1.0); // correct every epoch
        assert!((acc.get(0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let ent = by(ScoreKind::Entropy);
        assert_eq!(ent.get(2).unwrap(), 2.0);
        for t in &tables {
            assert_eq!(t.kind.alignment(), -1.0);
            assert_eq!(t.timing.work_units, 9);
        }
        assert!(learning_event_proxies(&EventLog { ids: vec![], epochs: vec![] }).is_err());
    }

    #[test]
    fn symmetric_kl_hand_value_and_properties() {
        let v = symmetric_kl(&[0.5, 0.5], &[0.9, 0.1]);
        assert!((v - 0.8789).abs() < 5e-5, "got {v}");
        let exact = 0.5 * (0.5f64 / 0.9).ln()
            + 0.5 * (0.5f64 / 0.1).ln()
            + 0.9 * (0.9f64 / 0.5).ln()
            + 0.1 * (0.1f64 / 0.5).ln();
        assert!((v - exact).abs() < 1e-15);
        // symmetric, nonnegative, zero iff equal
        assert_eq!(v, symmetric_kl(&[0.9, 0.1], &[0.5, 0.5]));
        assert_eq!(symmetric_kl(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
        assert!(symmetric_kl(&[0.0, 1.0], &[1e-9, 1.0 - 1e-9]) > 0.0);
    }

    #[test]
    fn holdout_proxy_zero_epochs_means_zero_scores() {
        let data = blobs();
        let run = train_on(&data, &data.train_ids(), &quick_cfg()).unwrap();
        let mut ft = holdout_finetune_cfg(&quick_cfg());
        ft.epochs = 0;
        let table = holdout_retraining_proxy(&run.model, &data, &ft).unwrap();
        assert_eq!(table.ids().collect::<Vec<_>>(), data.train_ids());
        assert!(table.iter().all(|(_, s)| s == 0.0));
    }

    #[test]
    fn holdout_proxy_covers_train_split_and_moves_scores() {
        let data = blobs();
        let cfg = quick_cfg();
        let run = train_on(&data, &data.train_ids(), &cfg).unwrap();
        let ft = holdout_finetune_cfg(&cfg);
        assert_eq!(ft.epochs, 2);
        assert!((ft.base_lr - cfg.base_lr / 10.0).abs() < 1e-15);
        let table = holdout_retraining_proxy(&run.model, &data, &ft).unwrap();
        assert_eq!(table.len(), data.train_ids().len());
        assert!(table.iter().all(|(_, s)| s >= 0.0));
        assert!(table.iter().any(|(_, s)| s > 0.0));
        assert_eq!(table.kind.alignment(), 1.0);
        // deterministic
        let again = holdout_retraining_proxy(&run.model, &data, &ft).unwrap();
        assert!(table.iter().eq(again.iter()));
    }

    #[test]
    fn curvature_of_constant_gradient_model_is_zero() {
        let data = blobs();
        // single linear layer with all-zero weights: the input gradient is
        // identically zero everywhere, so probe differences vanish
        let model = ModelState::zeroed(&[data.input_dim, data.n_classes], Activation::Identity);
        let table =
            loss_curvature_proxy(&[model], &data, &CurvatureConfig::default()).unwrap();
        assert!(table.iter().all(|(_, s)| s.abs() <= 1e-6));
        assert_eq!(table.len(), data.train_ids().len());
    }

    #[test]
    fn probe_curvature_is_step_invariant_for_linear_gradients() {
        // g(x) = A·x has constant curvature ‖A·v‖ along any direction v
        let a = [[2.0, -1.0], [0.5, 3.0]];
        let mut grad = |x: &[f64]| {
            Ok(vec![
                a[0][0] * x[0] + a[0][1] * x[1],
                a[1][0] * x[0] + a[1][1] * x[1],
            ])
        };
        let x = [0.3, -0.8];
        let c1 =
            probe_curvature(&mut grad, &x, 3, 1e-3, &mut rng::rng(42)).unwrap();
        let c2 =
            probe_curvature(&mut grad, &x, 3, 2e-3, &mut rng::rng(42)).unwrap();
        assert!((c1 - c2).abs() < 1e-9, "{c1} vs {c2}");
        assert!(c1 > 0.0);
    }

    #[test]
    fn curvature_matches_direct_recomputation() {
        let data = blobs();
        let cfg = quick_cfg();
        let run = train_on(&data, &data.train_ids(), &TrainConfig {
            collect_checkpoints: true,
            ..cfg
        })
        .unwrap();
        let last = run.checkpoints.last().unwrap().clone();
        let ccfg = CurvatureConfig { n_probes: 1, step: 1e-3, seed: 9 };
        let table = loss_curvature_proxy(&[last.clone()], &data, &ccfg).unwrap();
        // recompute one example by hand from the same derived probe stream
        let id = data.train_ids()[7];
        let ex = data.example(id);
        let mut stream = rng::rng(rng::mix(rng::mix(9, rng::tag::PROBE), id as u64));
        let g0 = last.input_gradient(&ex.features, ex.label).unwrap();
        let shifted: Vec<f64> = ex
            .features
            .iter()
            .map(|&v| v + 1e-3 * if stream.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let g1 = last.input_gradient(&shifted, ex.label).unwrap();
        let by_hand = g1
            .iter()
            .zip(&g0)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
            / 1e-3;
        assert!((table.get(id).unwrap() - by_hand).abs() < 1e-12);
    }

    fn table_of(kind: ScoreKind, vals: &[f64]) -> ScoreTable {
        let entries = vals.iter().enumerate().map(|(i, &v)| (i, v)).collect();
        ScoreTable::new(kind, entries, Vec::new(), Timing::new(0.0, 1)).unwrap()
    }

    #[test]
    fn spearman_hand_values() {
        let a = table_of(ScoreKind::Memorization, &[1.0, 2.0, 3.0]);
        let rev = table_of(ScoreKind::Confidence, &[3.0, 1.0, 2.0]);
        assert!((spearman(&a, &rev).unwrap() + 0.5).abs() < 1e-12);
        // monotone transform → 1, reversal → −1
        let mono = table_of(ScoreKind::Confidence, &[0.1, 0.4, 0.9]);
        assert_eq!(spearman(&a, &mono).unwrap(), 1.0);
        let flip = table_of(ScoreKind::Confidence, &[-1.0, -2.0, -3.0]);
        assert_eq!(spearman(&a, &flip).unwrap(), -1.0);
        // average ranks for ties: ranks (1.5, 1.5, 3) vs (1, 2, 3)
        let tied = table_of(ScoreKind::Memorization, &[1.0, 1.0, 2.0]);
        let clean = table_of(ScoreKind::Confidence, &[1.0, 2.0, 3.0]);
        let expect = 1.5 / (1.5f64.sqrt() * 2.0f64.sqrt());
        assert!((spearman(&tied, &clean).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn spearman_rejects_degenerate_inputs() {
        let a = table_of(ScoreKind::Memorization, &[1.0, 2.0]);
        let b = table_of(ScoreKind::Confidence, &[2.0, 1.0]);
        assert!(spearman(&a, &b).is_err()); // < 3 common ids
        let c = table_of(ScoreKind::Memorization, &[1.0, 1.0, 1.0]);
        let d = table_of(ScoreKind::Confidence, &[1.0, 2.0, 3.0]);
        assert!(spearman(&c, &d).is_err()); // constant ranks
    }

    #[test]
    fn spearman_excludes_undefined_ids_pairwise() {
        let a = ScoreTable::new(
            ScoreKind::Memorization,
            vec![(0, 1.0), (1, 2.0), (2, 3.0), (3, 4.0)],
            vec![4],
            Timing::new(0.0, 1),
        )
        .unwrap();
        let b = ScoreTable::new(
            ScoreKind::Confidence,
            vec![(0, 4.0), (1, 3.0), (2, 2.0), (4, 9.0)],
            vec![3],
            Timing::new(0.0, 1),
        )
        .unwrap();
        // only ids 0,1,2 are common and defined in both
        assert_eq!(spearman(&a, &b).unwrap(), -1.0);
    }

    #[test]
    fn fidelity_report_identity_row() {
        let mem = ScoreTable::new(
            ScoreKind::Memorization,
            vec![(0, 0.1), (1, 0.5), (2, 0.9)],
            Vec::new(),
            Timing::new(0.0, 1_000_000),
        )
        .unwrap();
        let proxy = ScoreTable::new(
            ScoreKind::HoldoutRetraining,
            vec![(0, 0.1), (1, 0.5), (2, 0.9)],
            Vec::new(),
            Timing::new(0.0, 10_000),
        )
        .unwrap();
        let rows =
            fidelity_report(&mem, std::slice::from_ref(&proxy), Timing::new(0.0, 100_000))
                .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].proxy, "holdout_retraining");
        assert_eq!(rows[0].spearman_vs_mem, 1.0);
        assert!((rows[0].pct_of_mem_time - 1.0).abs() < 1e-12);
        assert!((rows[0].pct_of_retrain_time - 10.0).abs() < 1e-12);
        let csv = fidelity_csv(&rows);
        assert!(csv.starts_with("proxy,spearman_vs_mem,"));
        assert_eq!(csv.lines().count(), 2);
        // baseline must really be a memorization table
        assert!(fidelity_report(&proxy, &[], Timing::new(0.0, 1)).is_err());
    }
}
