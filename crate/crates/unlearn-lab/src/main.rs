//! Thin command-line front end: parses arguments, loads the experiment
//! config, and hands off to the library driver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use unlearn_lab::config::load_config;
use unlearn_lab::driver::Driver;
use unlearn_lab::Error;

#[derive(Parser)]
#[command(
    name = "unlearn-lab",
    about = "Seeded, bit-reproducible machine-unlearning experiments on synthetic data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config file (sectioned key=value text).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Run a single seed instead of the config's seed list.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory (overrides the config's output_dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// Overwrite artifacts whose contents would change.
    #[arg(long, global = true)]
    force: bool,
    /// Worker threads (default: one per CPU). Outputs are identical at any
    /// value.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic dataset and write it as CSV.
    GenData,
    /// Train the original model; write checkpoint, event log, and summary.
    Train,
    /// Estimate per-example memorization scores.
    Mem,
    /// Compute the configured proxy score tables.
    Proxy,
    /// Compare each proxy against memorization: correlation and cost.
    Fidelity,
    /// Run the refined / vanilla / shuffle unlearning comparison.
    Rum,
    /// Run the multi-step sequential unlearning experiment.
    Sequential,
}

fn run(cli: Cli) -> Result<(), Error> {
    let config_path = cli.config.ok_or_else(|| Error::Config {
        line: 0,
        message: "--config PATH is required".into(),
    })?;
    let cfg = load_config(&config_path)?;
    let driver = Driver::new(cfg, cli.out, cli.seed, cli.force)?;
    let work = || match cli.command {
        Command::GenData => driver.gen_data(),
        Command::Train => driver.train(),
        Command::Mem => driver.mem(),
        Command::Proxy => driver.proxy(),
        Command::Fidelity => driver.fidelity(),
        Command::Rum => driver.rum(),
        Command::Sequential => driver.sequential(),
    };
    let files = match cli.jobs {
        Some(n) => {
            if n == 0 {
                return Err(Error::Config { line: 0, message: "--jobs must be at least 1".into() });
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Validation(format!("cannot build worker pool: {e}")))?;
            pool.install(work)?
        }
        None => work()?,
    };
    println!("{} file(s) up to date", files.len());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
