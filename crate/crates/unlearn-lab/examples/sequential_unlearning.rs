//! Multi-step unlearning: each round scores the surviving pool with the
//! confidence proxy, forgets a low/median/high band selection, re-scores, and
//! records the Gini coefficient of the proxy distribution. As the memorized
//! tail drains out of the pool the scores homogenize and the Gini falls —
//! the refined track's gains fade because there is less left to order.

use unlearn_lab::data::{make_dataset, DatasetConfig};
use unlearn_lab::eval::MiaConfig;
use unlearn_lab::memorization::ScoreKind;
use unlearn_lab::proxies::CurvatureConfig;
use unlearn_lab::rum::{sequential_stability, SequentialConfig};
use unlearn_lab::trainer::{train_on, TrainConfig};
use unlearn_lab::unlearn::{Algorithm, UnlearnConfig};

fn main() -> unlearn_lab::Result<()> {
    let data = make_dataset(&DatasetConfig::default())?;
    let train = TrainConfig::default();
    let run = train_on(&data, &data.train_ids(), &train)?;

    let cfg = SequentialConfig {
        n_steps: 3,
        band_size: 60,
        proxy: ScoreKind::Confidence,
        k: 3,
        algorithm: UnlearnConfig {
            algorithm: Algorithm::NegGradPlus,
            seed: 41,
            ..UnlearnConfig::default()
        },
        train: train.clone(),
        curvature: CurvatureConfig::default(),
        mia: MiaConfig { n_samples: 400, seed: 43 },
        seed: 47,
    };
    let out = sequential_stability(&data, &run.model, &cfg)?;

    println!("{:<6} {:<8} {:>7} {:>8} {:>7}", "step", "track", "tow", "tow_mia", "gini");
    for r in &out.records {
        println!(
            "{:<6} {:<8} {:>7.3} {:>8.3} {:>7.3}",
            r.step, r.approach, r.report.tow, r.report.tow_mia, r.gini
        );
    }

    let series = |g: &[f64]| g.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" → ");
    println!("\nGini series (step 0 = before any unlearning):");
    println!("  rum_f   {}", series(&out.gini_refined));
    println!("  vanilla {}", series(&out.gini_vanilla));
    let mono = out.gini_refined.windows(2).all(|w| w[1] <= w[0]);
    println!("rum_f track non-increasing: {mono}");
    Ok(())
}
