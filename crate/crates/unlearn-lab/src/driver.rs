//! Experiment driver behind the `unlearn-lab` binary: derives per-seed
//! configs, runs each pipeline, and emits digest-stamped CSV/JSON artifacts.
//! Re-running is idempotent; results that would change an existing file are
//! refused unless forced.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Approach, ExperimentConfig};
use crate::data::{make_dataset, select_forget, Band, Dataset, DatasetConfig};
use crate::error::{Error, Result};
use crate::eval::{evaluate, mean_ci95, MiaConfig};
use crate::memorization::{estimate_memorization, MemConfig, ScoreKind, ScoreTable};
use crate::proxies::{
    fidelity_csv, fidelity_report, holdout_finetune_cfg, holdout_retraining_proxy,
    learning_event_proxies, loss_curvature_proxy, CurvatureConfig, FidelityRow,
};
use crate::rng;
use crate::rum::{
    refine, rum_f, sequential_stability, shuffle_control, vanilla, RumPlan, SequentialConfig,
    SequentialOutcome,
};
use crate::timing::Timing;
use crate::trainer::{accuracy, train_on, TrainConfig, TrainRun};
use crate::unlearn::UnlearnConfig;

/// One experiment invocation: parsed config plus command-line overrides.
#[derive(Debug)]
pub struct Driver {
    pub cfg: ExperimentConfig,
    pub out_dir: PathBuf,
    pub seeds: Vec<u64>,
    pub force: bool,
}

/// One (algorithm, approach, proxy, seed) result of the rum pipeline.
#[derive(Debug, Clone)]
pub struct RumRow {
    pub algorithm: String,
    pub approach: String,
    pub proxy: String,
    pub seed: u64,
    pub tow: f64,
    pub tow_mia: f64,
    pub wall_time_s: f64,
}

#[derive(Serialize)]
struct TrainReport {
    config_digest: String,
    seed: u64,
    train_accuracy: f64,
    test_accuracy: f64,
    wall_time_s: f64,
    work_units: u64,
    model_sha256: String,
}

#[derive(Serialize)]
struct RumSummaryRow {
    algorithm: String,
    approach: String,
    proxy: String,
    n_seeds: usize,
    tow_mean: f64,
    tow_ci95: f64,
    tow_mia_mean: f64,
    tow_mia_ci95: f64,
    wall_time_s_mean: f64,
    wall_time_s_ci95: f64,
}

#[derive(Serialize)]
struct RumReport {
    config_digest: String,
    seeds: Vec<u64>,
    k: usize,
    rows: Vec<RumSummaryRow>,
}

#[derive(Serialize)]
struct SequentialMeta {
    config_digest: String,
    seed: u64,
    /// Shared Gini of the driving proxy before any unlearning.
    gini_step0: f64,
}

#[derive(Serialize)]
struct SequentialLine {
    step: usize,
    approach: &'static str,
    tow: f64,
    tow_mia: f64,
    gini: f64,
    wall_time_s: f64,
    forget_ids_digest: String,
}

fn parse_stamp(text: &str) -> Option<BTreeMap<String, String>> {
    let rest = text.lines().next()?.strip_prefix("# ")?;
    let mut map = BTreeMap::new();
    for tok in rest.split(' ') {
        let (k, v) = tok.split_once('=')?;
        map.insert(k.to_string(), v.to_string());
    }
    Some(map)
}

impl Driver {
    pub fn new(
        cfg: ExperimentConfig,
        out: Option<String>,
        seed: Option<u64>,
        force: bool,
    ) -> Result<Driver> {
        let out_dir = out
            .or_else(|| cfg.output_dir.clone())
            .ok_or_else(|| Error::Config {
                line: 0,
                message: "no output directory: set `output_dir = ...` or pass --out".into(),
            })?;
        let seeds = match seed {
            Some(s) => vec![s],
            None => cfg.seeds.clone(),
        };
        Ok(Driver { cfg, out_dir: PathBuf::from(out_dir), seeds, force })
    }

    fn write_file(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::create_dir_all(&self.out_dir)?;
        if path.exists() {
            let old = fs::read(&path)?;
            if old == bytes {
                println!("unchanged {}", path.display());
                return Ok(path);
            }
            if !self.force {
                return Err(Error::WouldOverwrite(path.display().to_string()));
            }
        }
        fs::write(&path, bytes)?;
        println!("wrote {}", path.display());
        Ok(path)
    }

    fn stamp_seed(&self, seed: u64) -> String {
        format!("# config_digest={} seed={seed}\n", self.cfg.digest)
    }

    fn stamp_table(&self, seed: u64, timing: Timing) -> String {
        format!(
            "# config_digest={} seed={seed} work_units={}\n",
            self.cfg.digest, timing.work_units
        )
    }

    fn stamp_seeds(&self) -> String {
        let list: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        format!("# config_digest={} seeds={}\n", self.cfg.digest, list.join(","))
    }

    fn dataset_for(&self, seed: u64) -> Result<Dataset> {
        let base = self.cfg.need_dataset()?;
        make_dataset(&DatasetConfig { seed: rng::mix(base.seed, seed), ..base.clone() })
    }

    fn train_cfg(&self, seed: u64, collect_checkpoints: bool) -> Result<TrainConfig> {
        let base = self.cfg.need_train()?;
        Ok(TrainConfig {
            seed: rng::mix(base.seed, seed),
            collect_checkpoints,
            ..base.clone()
        })
    }

    fn curvature_cfg(&self, seed: u64) -> CurvatureConfig {
        let base = self
            .cfg
            .proxy
            .as_ref()
            .map(|p| p.curvature.clone())
            .unwrap_or_default();
        CurvatureConfig { seed: rng::mix(base.seed, seed), ..base }
    }

    fn mem_table(&self, seed: u64, data: &Dataset) -> Result<ScoreTable> {
        let m = self.cfg.need_mem()?;
        let cfg = MemConfig {
            n_models: m.n_models,
            subset_fraction: m.subset_fraction,
            train: self.train_cfg(seed, false)?,
            seed: rng::mix(m.seed, seed),
        };
        estimate_memorization(data, &cfg)
    }

    /// Computes one score table of the given kind against the original
    /// training run `run` (events and checkpoints come from it).
    fn score_table(
        &self,
        kind: ScoreKind,
        seed: u64,
        data: &Dataset,
        run: &TrainRun,
    ) -> Result<ScoreTable> {
        match kind {
            ScoreKind::Memorization => self.mem_table(seed, data),
            ScoreKind::Confidence
            | ScoreKind::MaxConfidence
            | ScoreKind::Entropy
            | ScoreKind::BinaryAccuracy => {
                let tables = learning_event_proxies(&run.events)?;
                let mut found =
                    tables.into_iter().find(|t| t.kind == kind).expect("all event kinds produced");
                // the event log is free only once its training run is paid for
                found.timing += run.timing;
                Ok(found)
            }
            ScoreKind::HoldoutRetraining => {
                let ft = holdout_finetune_cfg(&self.train_cfg(seed, false)?);
                holdout_retraining_proxy(&run.model, data, &ft)
            }
            ScoreKind::LossCurvature => {
                loss_curvature_proxy(&run.checkpoints, data, &self.curvature_cfg(seed))
            }
        }
    }

    /// Reads back a previously written score table if its stamp matches this
    /// config and seed exactly.
    fn reuse_table(&self, name: &str, seed: u64, kind: ScoreKind) -> Option<ScoreTable> {
        let text = fs::read_to_string(self.out_dir.join(name)).ok()?;
        let stamp = parse_stamp(&text)?;
        if stamp.get("config_digest")? != &self.cfg.digest {
            return None;
        }
        if stamp.get("seed")?.parse::<u64>().ok()? != seed {
            return None;
        }
        let units: u64 = stamp.get("work_units")?.parse().ok()?;
        let table = ScoreTable::from_csv_str(&text, Timing::new(0.0, units)).ok()?;
        (table.kind == kind).then_some(table)
    }

    pub fn gen_data(&self) -> Result<Vec<PathBuf>> {
        let mut files = Vec::new();
        for &s in &self.seeds {
            let data = self.dataset_for(s)?;
            let csv = self.stamp_seed(s) + &data.to_csv_string();
            files.push(self.write_file(&format!("dataset_s{s}.csv"), csv.as_bytes())?);
            println!(
                "[seed {s}] dataset: {} train / {} test examples",
                data.train_ids().len(),
                data.test_ids().len()
            );
        }
        Ok(files)
    }

    pub fn train(&self) -> Result<Vec<PathBuf>> {
        let mut files = Vec::new();
        for &s in &self.seeds {
            let data = self.dataset_for(s)?;
            let cfg = self.train_cfg(s, false)?;
            let run = train_on(&data, &data.train_ids(), &cfg)?;
            let ckpt = run.model.to_bytes();
            files.push(self.write_file(&format!("model_s{s}.ckpt"), &ckpt)?);
            let events = self.stamp_seed(s) + &run.events.to_csv_string();
            files.push(self.write_file(&format!("events_s{s}.csv"), events.as_bytes())?);
            let report = TrainReport {
                config_digest: self.cfg.digest.clone(),
                seed: s,
                train_accuracy: accuracy(&run.model, &data, &data.train_ids())?,
                test_accuracy: accuracy(&run.model, &data, &data.test_ids())?,
                wall_time_s: run.timing.report_seconds(),
                work_units: run.timing.work_units,
                model_sha256: hex::encode(Sha256::digest(&ckpt)),
            };
            let json = serde_json::to_string_pretty(&report)? + "\n";
            files.push(self.write_file(&format!("train_s{s}.json"), json.as_bytes())?);
            println!(
                "[seed {s}] train acc {:.4}, test acc {:.4}, wall_time_s={}",
                report.train_accuracy, report.test_accuracy, report.wall_time_s
            );
        }
        Ok(files)
    }

    pub fn mem(&self) -> Result<Vec<PathBuf>> {
        let mut files = Vec::new();
        for &s in &self.seeds {
            let data = self.dataset_for(s)?;
            let table = self.mem_table(s, &data)?;
            let csv = self.stamp_table(s, table.timing) + &table.to_csv_string();
            files.push(self.write_file(&format!("mem_s{s}.csv"), csv.as_bytes())?);
            println!(
                "[seed {s}] memorization: {} scored, {} undefined, wall_time_s={}",
                table.len(),
                table.undefined_ids.len(),
                table.timing.report_seconds()
            );
        }
        Ok(files)
    }

    pub fn proxy(&self) -> Result<Vec<PathBuf>> {
        let px = self.cfg.need_proxy()?.clone();
        let mut files = Vec::new();
        for &s in &self.seeds {
            let data = self.dataset_for(s)?;
            let ckpts = px.kinds.contains(&ScoreKind::LossCurvature);
            let run = train_on(&data, &data.train_ids(), &self.train_cfg(s, ckpts)?)?;
            for &kind in &px.kinds {
                let table = self.score_table(kind, s, &data, &run)?;
                let csv = self.stamp_table(s, table.timing) + &table.to_csv_string();
                let name = format!("proxy_{}_s{s}.csv", kind.name());
                files.push(self.write_file(&name, csv.as_bytes())?);
                println!(
                    "[seed {s}] {}: {} scored, wall_time_s={}",
                    kind.name(),
                    table.len(),
                    table.timing.report_seconds()
                );
            }
        }
        Ok(files)
    }

    pub fn fidelity(&self) -> Result<Vec<PathBuf>> {
        let px = self.cfg.need_proxy()?.clone();
        self.cfg.need_mem()?;
        let mut files = Vec::new();
        let mut per_seed: Vec<Vec<FidelityRow>> = Vec::new();
        for &s in &self.seeds {
            let data = self.dataset_for(s)?;
            let ckpts = px.kinds.contains(&ScoreKind::LossCurvature);
            let run = train_on(&data, &data.train_ids(), &self.train_cfg(s, ckpts)?)?;
            let mem_name = format!("mem_s{s}.csv");
            let mem = match self.reuse_table(&mem_name, s, ScoreKind::Memorization) {
                Some(t) => {
                    println!("[seed {s}] reusing {mem_name}");
                    t
                }
                None => {
                    let t = self.mem_table(s, &data)?;
                    let csv = self.stamp_table(s, t.timing) + &t.to_csv_string();
                    files.push(self.write_file(&mem_name, csv.as_bytes())?);
                    t
                }
            };
            let mut tables = Vec::with_capacity(px.kinds.len());
            for &kind in &px.kinds {
                let name = format!("proxy_{}_s{s}.csv", kind.name());
                let table = match self.reuse_table(&name, s, kind) {
                    Some(t) => {
                        println!("[seed {s}] reusing {name}");
                        t
                    }
                    None => {
                        let t = self.score_table(kind, s, &data, &run)?;
                        let csv = self.stamp_table(s, t.timing) + &t.to_csv_string();
                        files.push(self.write_file(&name, csv.as_bytes())?);
                        t
                    }
                };
                tables.push(table);
            }
            let rows = fidelity_report(&mem, &tables, run.timing)?;
            let csv = self.stamp_seed(s) + &fidelity_csv(&rows);
            files.push(self.write_file(&format!("fidelity_s{s}.csv"), csv.as_bytes())?);
            for r in &rows {
                println!(
                    "[seed {s}] {}: spearman_vs_mem={:.4} wall_time_s={} ({:.3}% of mem)",
                    r.proxy, r.spearman_vs_mem, r.wall_time_s, r.pct_of_mem_time
                );
            }
            per_seed.push(rows);
        }
        let mut csv = self.stamp_seeds()
            + "proxy,n_seeds,spearman_vs_mem_mean,spearman_vs_mem_ci95,wall_time_s_mean,\
               pct_of_mem_time_mean,pct_of_retrain_time_mean\n";
        for (i, kind) in px.kinds.iter().enumerate() {
            let col = |f: &dyn Fn(&FidelityRow) -> f64| -> Vec<f64> {
                per_seed.iter().map(|rows| f(&rows[i])).collect()
            };
            let sp = col(&|r| r.spearman_vs_mem);
            let (sp_mean, sp_ci) = mean_ci95(&sp)?;
            let (wall_mean, _) = mean_ci95(&col(&|r| r.wall_time_s))?;
            let (pm_mean, _) = mean_ci95(&col(&|r| r.pct_of_mem_time))?;
            let (pr_mean, _) = mean_ci95(&col(&|r| r.pct_of_retrain_time))?;
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                kind.name(),
                sp.len(),
                sp_mean,
                sp_ci,
                wall_mean,
                pm_mean,
                pr_mean
            ));
        }
        files.push(self.write_file("fidelity_mean.csv", csv.as_bytes())?);
        Ok(files)
    }

    /// Runs the full rum comparison for one seed and returns its rows,
    /// including the per-proxy retrain reference row.
    pub fn rum_rows(&self, s: u64) -> Result<Vec<RumRow>> {
        let rum = self.cfg.need_rum()?.clone();
        let ul = self.cfg.need_unlearn()?.clone();
        let eval_cfg = *self.cfg.need_eval()?;
        if rum.proxies.contains(&ScoreKind::Memorization) {
            self.cfg.need_mem()?;
        }
        let data = self.dataset_for(s)?;
        let ckpts = rum.proxies.contains(&ScoreKind::LossCurvature);
        let tcfg = self.train_cfg(s, ckpts)?;
        let run = train_on(&data, &data.train_ids(), &tcfg)?;
        let mia = MiaConfig { n_samples: eval_cfg.n_samples, seed: rng::mix(eval_cfg.seed, s) };
        let ucfg = UnlearnConfig { seed: rng::mix(ul.seed, s), ..ul };
        let mut rows = Vec::new();
        for &kind in &rum.proxies {
            let table = self.score_table(kind, s, &data, &run)?;
            let task = select_forget(&table, rum.n_per_band, &[Band::Low, Band::Median, Band::High])?;
            let ocfg = TrainConfig {
                seed: rng::mix(tcfg.seed, rng::tag::ORACLE),
                collect_checkpoints: false,
                ..tcfg.clone()
            };
            let oracle = train_on(&data, &task.retain_ids, &ocfg)?;
            let reference = evaluate(&oracle.model, &oracle.model, &data, &task, &mia)?;
            rows.push(RumRow {
                algorithm: "retrain".into(),
                approach: "exact".into(),
                proxy: kind.name().into(),
                seed: s,
                tow: reference.tow,
                tow_mia: reference.tow_mia,
                wall_time_s: oracle.timing.report_seconds(),
            });
            for &ap in &rum.approaches {
                let out = match ap {
                    Approach::RumF => {
                        let plan = RumPlan {
                            partition: refine(&table, &task, rum.k)?,
                            algorithm: ucfg.clone(),
                        };
                        rum_f(&run.model, &data, &task, &plan, &tcfg)?
                    }
                    Approach::Vanilla => vanilla(&run.model, &data, &task, &ucfg, &tcfg)?,
                    Approach::Shuffle => shuffle_control(
                        &run.model,
                        &data,
                        &task,
                        &ucfg,
                        rum.k,
                        rng::mix(rum.seed, s),
                        &tcfg,
                    )?,
                };
                let report = evaluate(&out.model, &oracle.model, &data, &task, &mia)?;
                rows.push(RumRow {
                    algorithm: ucfg.algorithm.name().into(),
                    approach: ap.name().into(),
                    proxy: kind.name().into(),
                    seed: s,
                    tow: report.tow,
                    tow_mia: report.tow_mia,
                    wall_time_s: out.timing.report_seconds(),
                });
            }
        }
        Ok(rows)
    }

    pub fn rum(&self) -> Result<Vec<PathBuf>> {
        let rum = self.cfg.need_rum()?.clone();
        let mut files = Vec::new();
        let mut all: Vec<RumRow> = Vec::new();
        for &s in &self.seeds {
            let rows = self.rum_rows(s)?;
            let mut csv = self.stamp_seed(s) + "algorithm,approach,proxy,tow,tow_mia,wall_time_s\n";
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.algorithm, r.approach, r.proxy, r.tow, r.tow_mia, r.wall_time_s
                ));
                println!(
                    "[seed {s}] {} {} proxy={}: ToW={:.4} ToW-MIA={:.4} wall_time_s={}",
                    r.algorithm, r.approach, r.proxy, r.tow, r.tow_mia, r.wall_time_s
                );
            }
            files.push(self.write_file(&format!("rum_s{s}.csv"), csv.as_bytes())?);
            all.extend(rows);
        }
        let mut keys: Vec<(String, String, String)> = Vec::new();
        for r in &all {
            let key = (r.algorithm.clone(), r.approach.clone(), r.proxy.clone());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let mut summary = Vec::with_capacity(keys.len());
        for (alg, ap, px) in keys {
            let of = |f: &dyn Fn(&RumRow) -> f64| -> Vec<f64> {
                all.iter()
                    .filter(|r| r.algorithm == alg && r.approach == ap && r.proxy == px)
                    .map(f)
                    .collect()
            };
            let tow = of(&|r| r.tow);
            let (tow_mean, tow_ci95) = mean_ci95(&tow)?;
            let (tow_mia_mean, tow_mia_ci95) = mean_ci95(&of(&|r| r.tow_mia))?;
            let (wall_time_s_mean, wall_time_s_ci95) = mean_ci95(&of(&|r| r.wall_time_s))?;
            summary.push(RumSummaryRow {
                algorithm: alg,
                approach: ap,
                proxy: px,
                n_seeds: tow.len(),
                tow_mean,
                tow_ci95,
                tow_mia_mean,
                tow_mia_ci95,
                wall_time_s_mean,
                wall_time_s_ci95,
            });
        }
        let mut csv = self.stamp_seeds()
            + "algorithm,approach,proxy,n_seeds,tow_mean,tow_ci95,tow_mia_mean,tow_mia_ci95,\
               wall_time_s_mean,wall_time_s_ci95\n";
        for r in &summary {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.algorithm,
                r.approach,
                r.proxy,
                r.n_seeds,
                r.tow_mean,
                r.tow_ci95,
                r.tow_mia_mean,
                r.tow_mia_ci95,
                r.wall_time_s_mean,
                r.wall_time_s_ci95
            ));
        }
        files.push(self.write_file("rum_summary.csv", csv.as_bytes())?);
        let report = RumReport {
            config_digest: self.cfg.digest.clone(),
            seeds: self.seeds.clone(),
            k: rum.k,
            rows: summary,
        };
        let json = serde_json::to_string_pretty(&report)? + "\n";
        files.push(self.write_file("rum_report.json", json.as_bytes())?);
        Ok(files)
    }

    /// Runs the sequential stability experiment for one seed.
    pub fn sequential_outcome(&self, s: u64) -> Result<SequentialOutcome> {
        let seq = self.cfg.need_sequential()?.clone();
        let ul = self.cfg.need_unlearn()?.clone();
        let eval_cfg = *self.cfg.need_eval()?;
        let data = self.dataset_for(s)?;
        let train = self.train_cfg(s, false)?;
        let original = train_on(&data, &data.train_ids(), &train)?;
        let cfg = SequentialConfig {
            n_steps: seq.n_steps,
            band_size: seq.band_size,
            proxy: seq.proxy,
            k: seq.k,
            algorithm: UnlearnConfig { seed: rng::mix(ul.seed, s), ..ul },
            train,
            curvature: self.curvature_cfg(s),
            mia: MiaConfig { n_samples: eval_cfg.n_samples, seed: rng::mix(eval_cfg.seed, s) },
            seed: rng::mix(seq.seed, s),
        };
        sequential_stability(&data, &original.model, &cfg)
    }

    pub fn sequential(&self) -> Result<Vec<PathBuf>> {
        self.cfg.need_sequential()?;
        let mut files = Vec::new();
        let mut gini_csv = self.stamp_seeds() + "seed,approach,step,gini,non_increasing\n";
        for &s in &self.seeds {
            let out = self.sequential_outcome(s)?;
            let meta = SequentialMeta {
                config_digest: self.cfg.digest.clone(),
                seed: s,
                gini_step0: out.gini_refined[0],
            };
            let mut jsonl = serde_json::to_string(&meta)? + "\n";
            for r in &out.records {
                let line = SequentialLine {
                    step: r.step,
                    approach: r.approach,
                    tow: r.report.tow,
                    tow_mia: r.report.tow_mia,
                    gini: r.gini,
                    wall_time_s: r.wall_time_s,
                    forget_ids_digest: r.forget_ids_digest.clone(),
                };
                jsonl.push_str(&serde_json::to_string(&line)?);
                jsonl.push('\n');
            }
            files.push(self.write_file(&format!("sequential_s{s}.jsonl"), jsonl.as_bytes())?);
            for (approach, series) in
                [("rum_f", &out.gini_refined), ("vanilla", &out.gini_vanilla)]
            {
                let mut monotone = true;
                for (step, &g) in series.iter().enumerate() {
                    let ok = step == 0 || g <= series[step - 1];
                    monotone &= ok;
                    gini_csv.push_str(&format!(
                        "{s},{approach},{step},{g},{}\n",
                        u8::from(ok)
                    ));
                }
                println!(
                    "[seed {s}] {approach}: gini {} over {} steps",
                    if monotone { "non-increasing" } else { "NOT non-increasing" },
                    series.len() - 1
                );
            }
        }
        files.push(self.write_file("gini.csv", gini_csv.as_bytes())?);
        Ok(files)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    const SMALL: &str = "\
seeds = 1, 2
output_dir = unused

[dataset]
n_classes = 3
n_train = 90
n_test = 45
input_dim = 5
atypical_fraction = 0.1
noise_fraction = 0.1

[train]
hidden_dims = 12
epochs = 8
batch_size = 32
base_lr = 0.08
";

    fn driver(dir: &std::path::Path, text: &str, force: bool) -> Driver {
        Driver::new(
            parse_config(text).unwrap(),
            Some(dir.to_string_lossy().into_owned()),
            None,
            force,
        )
        .unwrap()
    }

    #[test]
    fn gen_data_is_idempotent_and_guards_overwrites() {
        let dir = tempfile::tempdir().unwrap();
        let d = driver(dir.path(), SMALL, false);
        let files = d.gen_data().unwrap();
        assert_eq!(files.len(), 2);
        let before = fs::read(&files[0]).unwrap();
        d.gen_data().unwrap();
        assert_eq!(fs::read(&files[0]).unwrap(), before);
        // changed config (different dataset seed) → same filenames, new bytes
        let changed = format!("{SMALL}seed = 9\n");
        let d2 = driver(dir.path(), &changed, false);
        let err = d2.gen_data().unwrap_err();
        assert!(matches!(err, Error::WouldOverwrite(_)), "{err}");
        let d3 = driver(dir.path(), &changed, true);
        d3.gen_data().unwrap();
        assert_ne!(fs::read(&files[0]).unwrap(), before);
    }

    #[test]
    fn seed_override_narrows_the_run() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(SMALL).unwrap();
        let d = Driver::new(cfg, Some(dir.path().to_string_lossy().into_owned()), Some(2), false)
            .unwrap();
        assert_eq!(d.seeds, vec![2]);
        let files = d.gen_data().unwrap();
        assert!(files[0].file_name().unwrap().to_string_lossy().contains("_s2"));
    }

    #[test]
    fn missing_output_dir_is_a_config_error() {
        let cfg = parse_config("seeds = 1\n").unwrap();
        let err = Driver::new(cfg, None, None, false).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn train_artifacts_are_stamped_and_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let d = driver(dir.path(), SMALL, false);
        let files = d.train().unwrap();
        assert_eq!(files.len(), 6); // (ckpt, events, json) × 2 seeds
        let events = fs::read_to_string(&files[1]).unwrap();
        let stamp = parse_stamp(&events).unwrap();
        assert_eq!(stamp["config_digest"], d.cfg.digest);
        assert_eq!(stamp["seed"], "1");
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&files[2]).unwrap()).unwrap();
        assert_eq!(json["config_digest"], d.cfg.digest.as_str());
        assert_eq!(json["seed"], 1);
        assert!(json["train_accuracy"].as_f64().unwrap() > 0.5);
        // second run leaves every byte alone
        let bytes: Vec<Vec<u8>> = files.iter().map(|f| fs::read(f).unwrap()).collect();
        d.train().unwrap();
        for (f, b) in files.iter().zip(&bytes) {
            assert_eq!(&fs::read(f).unwrap(), b);
        }
    }

    #[test]
    fn fidelity_reuses_matching_tables() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!(
            "{SMALL}\n[mem]\nt = 6\np = 0.7\n\n[proxy]\nproxies = confidence\n"
        );
        let d = Driver::new(
            parse_config(&text).unwrap(),
            Some(dir.path().to_string_lossy().into_owned()),
            Some(1),
            false,
        )
        .unwrap();
        let first = d.fidelity().unwrap();
        let mem_path = dir.path().join("mem_s1.csv");
        let before = fs::read(&mem_path).unwrap();
        // second run must reuse (same bytes, no overwrite refusal)
        let second = d.fidelity().unwrap();
        assert_eq!(fs::read(&mem_path).unwrap(), before);
        assert!(first.iter().any(|p| p.ends_with("fidelity_s1.csv")));
        assert!(second.iter().any(|p| p.ends_with("fidelity_mean.csv")));
    }
}
