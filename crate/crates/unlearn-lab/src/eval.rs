//! Unlearning quality metrics: tug-of-war scores against the retrained
//! oracle, a confidence-feature membership-inference attack, and Gini /
//! Lorenz summaries of score-distribution skew.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, UnlearnTask};
use crate::error::{Error, Result};
use crate::memorization::sample_without_replacement;
use crate::nn::ModelState;
use crate::rng;
use crate::timing::Timing;
use crate::trainer;

/// Product of the per-split agreement terms (1 − Δa) for the forget, retain,
/// and test splits, each gap the absolute accuracy difference between the
/// unlearned model and the retrained oracle.
pub fn tow_from_gaps(gap_forget: f64, gap_retain: f64, gap_test: f64) -> f64 {
    (1.0 - gap_forget) * (1.0 - gap_retain) * (1.0 - gap_test)
}

fn accuracy_gaps(
    unlearned: &ModelState,
    retrained: &ModelState,
    data: &Dataset,
    task: &UnlearnTask,
) -> Result<[(f64, f64); 3]> {
    let splits: [&[usize]; 3] = [&task.forget_ids, &task.retain_ids, &data.test_ids()];
    let mut out = [(0.0, 0.0); 3];
    for (k, ids) in splits.iter().enumerate() {
        let a_u = trainer::accuracy(unlearned, data, ids)?;
        let a_r = trainer::accuracy(retrained, data, ids)?;
        out[k] = (a_u, a_r);
    }
    Ok(out)
}

/// Tug-of-war score: 1 means the unlearned model matches the retrained
/// oracle's accuracy on every split.
pub fn tow(
    unlearned: &ModelState,
    retrained: &ModelState,
    data: &Dataset,
    task: &UnlearnTask,
) -> Result<f64> {
    let accs = accuracy_gaps(unlearned, retrained, data, task)?;
    Ok(tow_from_gaps(
        (accs[0].0 - accs[0].1).abs(),
        (accs[1].0 - accs[1].1).abs(),
        (accs[2].0 - accs[2].1).abs(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiaConfig {
    /// Examples sampled from each of the retain and test splits to train the
    /// attack classifier.
    pub n_samples: usize,
    pub seed: u64,
}

/// Per-example attack features under a model: true-class probability,
/// prediction entropy, and cross-entropy loss (probability floored at 1e-12).
fn mia_features(model: &ModelState, data: &Dataset, ids: &[usize]) -> Result<Vec<[f64; 3]>> {
    let probs = trainer::class_probs(model, data, ids)?;
    Ok(ids
        .iter()
        .zip(&probs)
        .map(|(&id, row)| {
            let label = data.example(id).label;
            let p = row[label];
            let entropy: f64 = row.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.ln()).sum();
            let loss = -(p.max(1e-12)).ln();
            [p, entropy, loss]
        })
        .collect())
}

/// Mean and scale per feature over the attack training rows; a constant
/// feature gets scale 1 so it simply centers to zero.
fn standardize_params(rows: &[[f64; 3]]) -> ([f64; 3], [f64; 3]) {
    let n = rows.len() as f64;
    let mut mean = [0.0; 3];
    for r in rows {
        for k in 0..3 {
            mean[k] += r[k] / n;
        }
    }
    let mut scale = [0.0; 3];
    for r in rows {
        for k in 0..3 {
            scale[k] += (r[k] - mean[k]).powi(2) / n;
        }
    }
    for s in &mut scale {
        *s = s.sqrt();
        if *s < 1e-12 {
            *s = 1.0;
        }
    }
    (mean, scale)
}

fn apply_standardize(rows: &mut [[f64; 3]], mean: &[f64; 3], scale: &[f64; 3]) {
    for r in rows {
        for k in 0..3 {
            r[k] = (r[k] - mean[k]) / scale[k];
        }
    }
}

/// Full-batch gradient descent on L2-regularized logistic loss: fixed 500
/// iterations at step 0.1, penalty 1e-3 on the weights (not the intercept).
fn fit_logistic(rows: &[[f64; 3]], labels: &[f64]) -> ([f64; 3], f64) {
    const ITERS: usize = 500;
    const STEP: f64 = 0.1;
    const L2: f64 = 1e-3;
    let n = rows.len() as f64;
    let mut w = [0.0f64; 3];
    let mut b = 0.0f64;
    for _ in 0..ITERS {
        let mut gw = [0.0f64; 3];
        let mut gb = 0.0f64;
        for (r, &y) in rows.iter().zip(labels) {
            let z = w[0] * r[0] + w[1] * r[1] + w[2] * r[2] + b;
            let p = 1.0 / (1.0 + (-z).exp());
            let d = p - y;
            for k in 0..3 {
                gw[k] += d * r[k] / n;
            }
            gb += d / n;
        }
        for k in 0..3 {
            w[k] -= STEP * (gw[k] + 2.0 * L2 * w[k]);
        }
        b -= STEP * gb;
    }
    (w, b)
}

/// Fraction of rows the classifier calls non-training (z < 0; the tie z = 0
/// counts as training).
pub(crate) fn fraction_non_training(w: &[f64; 3], b: f64, rows: &[[f64; 3]]) -> f64 {
    let neg = rows
        .iter()
        .filter(|r| w[0] * r[0] + w[1] * r[1] + w[2] * r[2] + b < 0.0)
        .count();
    neg as f64 / rows.len() as f64
}

/// Membership-inference score of a model on the forget set: train a linear
/// attack to separate retain ("training") from test ("non-training") samples
/// by confidence features, then report the fraction of forget examples the
/// attack labels non-training. High values mean the forget set looks held-out.
pub fn mia_score(
    model: &ModelState,
    data: &Dataset,
    task: &UnlearnTask,
    cfg: &MiaConfig,
) -> Result<f64> {
    if cfg.n_samples == 0 {
        return Err(Error::Validation(
            "attack training needs at least one sample per class".into(),
        ));
    }
    let test_ids = data.test_ids();
    if cfg.n_samples > task.retain_ids.len() || cfg.n_samples > test_ids.len() {
        return Err(Error::Validation(format!(
            "n_samples {} exceeds retain ({}) or test ({}) size",
            cfg.n_samples,
            task.retain_ids.len(),
            test_ids.len()
        )));
    }
    let base = rng::mix(cfg.seed, rng::tag::MIA);
    let retain_sample =
        sample_without_replacement(&task.retain_ids, cfg.n_samples, rng::mix(base, 0));
    let test_sample = sample_without_replacement(&test_ids, cfg.n_samples, rng::mix(base, 1));
    let mut rows = mia_features(model, data, &retain_sample)?;
    rows.extend(mia_features(model, data, &test_sample)?);
    let mut labels = vec![1.0; cfg.n_samples];
    labels.extend(vec![0.0; cfg.n_samples]);
    let (mean, scale) = standardize_params(&rows);
    apply_standardize(&mut rows, &mean, &scale);
    let (w, b) = fit_logistic(&rows, &labels);
    let mut forget_rows = mia_features(model, data, &task.forget_ids)?;
    apply_standardize(&mut forget_rows, &mean, &scale);
    Ok(fraction_non_training(&w, b, &forget_rows))
}

/// ToW with the forget term replaced by MIA agreement:
/// (1 − Δmia on forget) · (1 − Δa on retain) · (1 − Δa on test).
pub fn tow_mia(
    unlearned: &ModelState,
    retrained: &ModelState,
    data: &Dataset,
    task: &UnlearnTask,
    cfg: &MiaConfig,
) -> Result<f64> {
    let accs = accuracy_gaps(unlearned, retrained, data, task)?;
    let m_u = mia_score(unlearned, data, task, cfg)?;
    let m_r = mia_score(retrained, data, task, cfg)?;
    Ok(tow_from_gaps(
        (m_u - m_r).abs(),
        (accs[1].0 - accs[1].1).abs(),
        (accs[2].0 - accs[2].1).abs(),
    ))
}

/// Side-by-side accuracies, MIA scores, and tug-of-war summaries for an
/// unlearned model against its retrained oracle. `wall_time_s` is the
/// deterministic cost of this evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub acc_forget_u: f64,
    pub acc_forget_r: f64,
    pub acc_retain_u: f64,
    pub acc_retain_r: f64,
    pub acc_test_u: f64,
    pub acc_test_r: f64,
    pub mia_u: f64,
    pub mia_r: f64,
    pub tow: f64,
    pub tow_mia: f64,
    pub wall_time_s: f64,
}

impl EvalReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Evaluates an unlearned model against the retrained oracle on one task.
pub fn evaluate(
    unlearned: &ModelState,
    retrained: &ModelState,
    data: &Dataset,
    task: &UnlearnTask,
    cfg: &MiaConfig,
) -> Result<EvalReport> {
    let accs = accuracy_gaps(unlearned, retrained, data, task)?;
    let mia_u = mia_score(unlearned, data, task, cfg)?;
    let mia_r = mia_score(retrained, data, task, cfg)?;
    let tow = tow_from_gaps(
        (accs[0].0 - accs[0].1).abs(),
        (accs[1].0 - accs[1].1).abs(),
        (accs[2].0 - accs[2].1).abs(),
    );
    let tow_mia = tow_from_gaps(
        (mia_u - mia_r).abs(),
        (accs[1].0 - accs[1].1).abs(),
        (accs[2].0 - accs[2].1).abs(),
    );
    // two accuracy passes per split plus two attacks, in forward-pass units
    let n_eval = task.forget_ids.len() + task.retain_ids.len() + data.test_ids().len();
    let mia_work = 2 * (2 * cfg.n_samples + task.forget_ids.len());
    let timing = Timing::new(0.0, (2 * n_eval + mia_work) as u64);
    Ok(EvalReport {
        acc_forget_u: accs[0].0,
        acc_forget_r: accs[0].1,
        acc_retain_u: accs[1].0,
        acc_retain_r: accs[1].1,
        acc_test_u: accs[2].0,
        acc_test_r: accs[2].1,
        mia_u,
        mia_r,
        tow,
        tow_mia,
        wall_time_s: timing.report_seconds(),
    })
}

fn clamped_ascending(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::Validation("need at least one score".into()));
    }
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("scores must be finite".into()));
    }
    let mut x: Vec<f64> = scores.iter().map(|&v| v.max(0.0)).collect();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if *x.last().unwrap() == 0.0 {
        return Err(Error::Validation(
            "Gini of an all-zero distribution is undefined".into(),
        ));
    }
    Ok(x)
}

/// Gini coefficient of a nonnegative distribution (negatives are clamped to
/// zero first): (2·Σᵢ i·xᵢ)/(n·Σx) − (n+1)/n over ascending scores, 1-based.
pub fn gini(scores: &[f64]) -> Result<f64> {
    let x = clamped_ascending(scores)?;
    let n = x.len() as f64;
    let total: f64 = x.iter().sum();
    let weighted: f64 = x.iter().enumerate().map(|(i, &v)| (i + 1) as f64 * v).sum();
    Ok((2.0 * weighted) / (n * total) - (n + 1.0) / n)
}

/// Lorenz curve points (population fraction, score fraction) over ascending
/// scores; n+1 points from (0,0) to (1,1).
pub fn lorenz(scores: &[f64]) -> Result<Vec<(f64, f64)>> {
    let x = clamped_ascending(scores)?;
    let n = x.len();
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    for &v in &x {
        acc += v;
        cum.push(acc);
    }
    let total = *cum.last().unwrap();
    Ok(cum
        .into_iter()
        .enumerate()
        .map(|(k, c)| (k as f64 / n as f64, c / total))
        .collect())
}

/// Mean and 95% confidence half-width over seeds (t-interval; a single value
/// has zero width).
pub fn mean_ci95(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Validation("cannot summarize zero values".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    Ok((mean, t_quantile_975(values.len() - 1) * se))
}

/// Two-sided 95% Student-t quantile by degrees of freedom (1–30 tabulated,
/// normal approximation beyond).
fn t_quantile_975(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179,
        2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
        2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    ];
    if df == 0 {
        return f64::INFINITY;
    }
    if df <= TABLE.len() {
        TABLE[df - 1]
    } else {
        1.96
    }
}
