//! Score every cheap memorization proxy against the ensemble estimate on the
//! default dataset: Spearman fidelity plus cost as a percentage of the
//! estimator's (and one retraining run's) virtual time. The signs differ by
//! design — confidence falls with memorization, holdout divergence rises.

use unlearn_lab::data::{make_dataset, DatasetConfig};
use unlearn_lab::memorization::{estimate_memorization, MemConfig};
use unlearn_lab::proxies::{
    fidelity_report, holdout_finetune_cfg, holdout_retraining_proxy, learning_event_proxies,
    loss_curvature_proxy, CurvatureConfig,
};
use unlearn_lab::trainer::{train_on, TrainConfig};

fn main() -> unlearn_lab::Result<()> {
    let data = make_dataset(&DatasetConfig::default())?;
    let train = TrainConfig { collect_checkpoints: true, ..TrainConfig::default() };
    let run = train_on(&data, &data.train_ids(), &train)?;

    let mem = estimate_memorization(
        &data,
        &MemConfig { n_models: 40, subset_fraction: 0.7, train: train.clone(), seed: 3 },
    )?;
    println!("memorization estimate: T=40 models, {:.2}s virtual\n", mem.timing.report_seconds());

    // four proxies ride the training event log; two need the trained model
    let mut proxies = learning_event_proxies(&run.events)?;
    for p in &mut proxies {
        p.timing += run.timing; // they are free only once training is paid for
    }
    proxies.push(holdout_retraining_proxy(&run.model, &data, &holdout_finetune_cfg(&train))?);
    proxies.push(loss_curvature_proxy(
        &run.checkpoints,
        &data,
        &CurvatureConfig { n_probes: 2, step: 1e-3, seed: 5 },
    )?);

    println!(
        "{:<20} {:>9} {:>12} {:>14}",
        "proxy", "spearman", "% mem time", "% retrain time"
    );
    for row in fidelity_report(&mem, &proxies, run.timing)? {
        println!(
            "{:<20} {:>+9.3} {:>11.2}% {:>13.1}%",
            row.proxy, row.spearman_vs_mem, row.pct_of_mem_time, row.pct_of_retrain_time
        );
    }
    println!("\nnegative Spearman = score falls as memorization rises (low-confidence,");
    println!("rarely-correct examples are the memorized ones)");
    Ok(())
}
