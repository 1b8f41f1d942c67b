//! Desk-scale laboratory for memorization-aware machine unlearning.
//!
//! Everything runs in seconds on a CPU: a dense f64 classifier on synthetic
//! Gaussian cluster data, a subsampled-ensemble memorization estimator with an
//! exact leave-one-out oracle, cheap per-example memorization proxies, four
//! unlearning algorithms, a refined-partition meta-algorithm that unlearns in
//! ascending memorization order, and tug-of-war / membership-inference /
//! Gini-based evaluation. Every stage is seeded and bit-reproducible.
//!
//! The examples directory is the front door — each file is a runnable
//! walkthrough of one capability:
//!
//! ```text
//! cargo run --release -p unlearn-lab --example train_and_eval
//! cargo run --release -p unlearn-lab --example memorization_scores
//! cargo run --release -p unlearn-lab --example proxy_fidelity
//! cargo run --release -p unlearn-lab --example unlearning_algorithms
//! cargo run --release -p unlearn-lab --example rum_comparison
//! cargo run --release -p unlearn-lab --example sequential_unlearning
//! ```
//!
//! The same pipelines are scriptable through the `unlearn-lab` binary
//! (`gen-data`, `train`, `mem`, `proxy`, `fidelity`, `rum`, `sequential`),
//! which reads a sectioned key=value config and writes digest-stamped CSV and
//! JSON artifacts.

pub mod config;
pub mod data;
pub mod driver;
pub mod error;
pub mod eval;
pub mod memorization;
pub mod nn;
pub mod proxies;
pub mod rng;
pub mod rum;
pub mod timing;
pub mod trainer;
pub mod unlearn;

pub use error::{Error, Result};

/// Index-ordered parallel map over `0..n` using the current rayon pool.
/// Results are collected by index, so output never depends on thread count.
pub(crate) fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}
