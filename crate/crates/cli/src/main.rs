//! `kinwave`: forward solves, gradient checks and source reconstruction for
//! the wave equation with kinetic boundary conditions.
//!
//! Exit codes: 0 success, 2 usage, config or data error, 3 tolerance
//! violation, 4 solver failure.

mod commands;
mod config;
mod error;
mod input;
mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kinwave::ExperimentConfig;

use crate::config::{Config, Overrides};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "kinwave", version, about = "Wave equation with kinetic boundary conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the forward problem and write snapshots and the terminal state.
    Forward {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Compare the adjoint gradient with finite differences on nx/2, nx, 2nx.
    Gradcheck {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Seed for the random source, data and direction
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Reconstruct the source of one of the built-in examples (1, 2 or 3).
    Example {
        n: usize,
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated noise levels in percent
        #[arg(long, value_delimiter = ',', default_value = "0,1,3,5")]
        noise: Vec<f64>,
        /// Noise seeds, comma-separated
        #[arg(long, value_delimiter = ',', default_value = "1")]
        seed: Vec<u64>,
        /// Generate data on a twice finer mesh
        #[arg(long)]
        refine_data: bool,
    },
    /// Reconstruct a spatial source amplitude from a measured terminal state.
    Invert {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(path: &Path, overrides: &Overrides) -> Result<Config> {
    let mut cfg = Config::load(path)?;
    overrides.apply(&mut cfg);
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Forward { config, overrides } => commands::forward(&load(&config, &overrides)?),
        Command::Gradcheck {
            config,
            overrides,
            seed,
        } => {
            let mut cfg = load(&config, &overrides)?;
            if let Some(s) = seed {
                cfg.source.seed = s;
            }
            commands::gradcheck(&cfg)
        }
        Command::Example {
            n,
            overrides,
            noise,
            seed,
            refine_data,
        } => {
            let d = ExperimentConfig::default();
            let cfg = ExperimentConfig {
                cells: overrides.nx.unwrap_or(d.cells),
                courant: overrides.cfl.unwrap_or(d.courant),
                eps: overrides.eps.unwrap_or(d.eps),
                stop_tol: overrides.stop_tol.unwrap_or(d.stop_tol),
                max_iter: overrides.max_iter.unwrap_or(d.max_iter),
                refine_data,
            };
            let dir = overrides.out.unwrap_or_else(|| PathBuf::from("out"));
            commands::example(n, &noise, &seed, &cfg, &dir)
        }
        Command::Invert { config, overrides } => commands::invert(&load(&config, &overrides)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
