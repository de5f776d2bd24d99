//! Experiment runner for interdependent-RGG percolation studies.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

mod config;
mod experiments;
mod output;
mod selfcheck;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, ExperimentConfig, RawConfig};

#[derive(Parser)]
#[command(
    name = "rggperc",
    version,
    about = "Percolation experiments on interdependent random geometric graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
        /// Override the [experiment] seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the [output] dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores); overrides [experiment] threads.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the fast per-module invariant suite.
    Selfcheck,
    /// Print the library version.
    Version,
}

fn load_config(
    path: &Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<ExperimentConfig, ConfigError> {
    let raw = RawConfig::load(path)?;
    let mut cfg = ExperimentConfig::from_raw(raw)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(out) = out {
        cfg.out_dir = out;
    }
    if let Some(threads) = threads {
        cfg.threads = threads;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Version => {
            println!("rggperc {}", rggperc::VERSION);
            ExitCode::SUCCESS
        }
        Command::Selfcheck => {
            if selfcheck::run() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Run {
            config,
            seed,
            out,
            threads,
        } => {
            let cfg = match load_config(&config, seed, out, threads) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            if cfg.threads > 0 {
                // Ignore the error when a global pool already exists.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.threads)
                    .build_global();
            }
            match experiments::run(&cfg) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(3)
                }
            }
        }
    }
}
