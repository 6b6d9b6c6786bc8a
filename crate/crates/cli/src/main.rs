//! `lenient-bandits`: run lenient-regret experiments, tabulate asymptotic
//! regret coefficients and check the numerical property suites.
//!
//! Exit codes: 0 success, 1 a verification property failed, 2 bad
//! configuration or arguments, 3 I/O failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::Config;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lenient-bandits", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV outputs; created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override a config entry, e.g. `--set horizon=1000`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn load(&self) -> Result<Config, CliError> {
        let mut config = Config::load(&self.config)?;
        for o in &self.overrides {
            config.set(o)?;
        }
        Ok(config)
    }
}

/// Worker count: a positive integer or `auto`.
#[derive(Debug, Clone, Copy)]
struct Threads(usize);

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Self(0));
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Self(n)),
            _ => Err(format!("expected a positive integer or `auto`, got {s:?}")),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment; writes curves.csv and finals.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Number of seeds (overrides `seeds`).
        #[arg(long)]
        seeds: Option<u64>,
        /// Base seed (overrides `seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; results do not depend on this.
        #[arg(long, env = "LENIENT_BANDITS_THREADS", default_value = "auto")]
        threads: Threads,
        /// Also write per_seed.csv with every replicate's final regret.
        #[arg(long)]
        per_seed: bool,
    },
    /// Tabulate the lower, epsilon-TS and TS regret coefficients per arm.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the TS / epsilon-TS coefficient ratio over the optimal mean.
    Ratio {
        #[command(flatten)]
        common: Common,
        /// Write `nan` at grid points where the ratio is undefined instead
        /// of failing.
        #[arg(long)]
        allow_degenerate: bool,
    },
    /// Run the grid property suites; exits 1 if any property fails.
    Verify {
        /// Grid points per unit interval.
        #[arg(long, default_value_t = lenient_bandits::verify::DEFAULT_GRID_DENSITY,
              value_parser = clap::value_parser!(u32).range(1..))]
        grid_density: u32,
        /// Swap in a deliberately broken KL divergence (checks that the
        /// suites can fail).
        #[arg(long, hide = true)]
        inject_kl_fault: bool,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Simulate {
            common,
            seeds,
            seed,
            threads,
            per_seed,
        } => {
            let mut config = common.load()?;
            if let Some(n) = seeds {
                config.set(&format!("seeds={n}"))?;
            }
            if let Some(s) = seed {
                config.set(&format!("seed={s}"))?;
            }
            commands::simulate(&config, &common.out, threads.0, per_seed)?;
        }
        Command::Bounds { common } => commands::bounds(&common.load()?, &common.out)?,
        Command::Ratio {
            common,
            allow_degenerate,
        } => commands::ratio(&common.load()?, &common.out, allow_degenerate)?,
        Command::Verify {
            grid_density,
            inject_kl_fault,
        } => return Ok(commands::verify(grid_density, inject_kl_fault)),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("lenient-bandits: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
