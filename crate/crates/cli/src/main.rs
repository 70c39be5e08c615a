use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

mod commands;
mod config;
mod manifest;

use config::{Overrides, Preset};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] semireg::error::Error),
    #[error("{0}")]
    Io(String),
    #[error("bad input: {0}")]
    Input(String),
}

impl CliError {
    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "semireg", version, about = "Adaptive estimation of a periodic signal under semi-Markov noise")]
struct Cli {
    /// TOML file overlaid on the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed for every random stream (at most 2^63 - 1).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replications. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reject frequencies below n^(5/6) instead of warning.
    #[arg(long, global = true)]
    strict_h5: bool,
    #[arg(long, global = true, value_enum, default_value = "paper-sec6")]
    preset: Preset,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one observation path `y_j`, `j = 0..=n*p`.
    Simulate {
        /// Horizon; defaults to the first configured value.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        replication: u64,
    },
    /// Fit the adaptive estimator to one path.
    Estimate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        replication: u64,
        /// Path CSV (`j,t_j,y_j`) to fit instead of a simulated one.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Monte Carlo risk of the adaptive estimator for every configured n.
    RiskTable {
        /// Fill the `seconds` column with wall-clock times.
        #[arg(long)]
        record_timing: bool,
    },
    /// Renewal density of the configured inter-arrival law.
    RenewalDensity {
        /// Grid step; defaults to tau/100.
        #[arg(long)]
        step: Option<f64>,
        /// Right end of the grid; defaults to 40 tau.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Signal and adaptive estimate on the grid, one file per configured n.
    Figures {
        #[arg(long, default_value_t = 0)]
        replication: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let overrides = Overrides {
        config_path: cli.config.clone(),
        seed: cli.seed,
        strict_h5: cli.strict_h5,
    };
    let config = match config::load(cli.preset, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli.command, &config, &cli.out, cli.threads) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
