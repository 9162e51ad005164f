//! `torus-energy`: command-line experiments on the flat torus.
//!
//! Exit codes: 0 on success or a passing verdict, 2 on input errors,
//! 3 when a checked verdict fails.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, Format};

#[derive(Debug, Parser)]
#[command(name = "torus-energy", version, about = "Potential theory experiments on the flat torus")]
pub struct Cli {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "TORUS_ENERGY_THREADS")]
    threads: Option<usize>,
    /// What to print on stdout: the report JSON or the main CSV table.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct KernelArgs {
    /// Riesz exponent.
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// Additive kernel shift.
    #[arg(long)]
    pub shift: Option<f64>,
    /// Shift the Riesz kernel to be nonnegative on the space.
    #[arg(long)]
    pub default_shift: bool,
    /// Kernel spec as a JSON file.
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    /// `torus:d`, `circle` or `sphere2`.
    #[arg(long)]
    pub space: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy of a measure, optionally with its potential on a probe grid.
    Energy {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        include_diagonal: bool,
        /// Write the potential on an n^d probe grid.
        #[arg(long)]
        potential_grid: Option<usize>,
    },
    /// Random scan of the submean value inequality for K(·, y).
    ScanSubharmonic {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        radii: Option<usize>,
        /// Monte Carlo evaluations per ball.
        #[arg(long)]
        mc_n: Option<usize>,
        /// Use a tensor rule with this many nodes per axis instead.
        #[arg(long)]
        tensor_n: Option<usize>,
        #[arg(long)]
        radius_bound: Option<f64>,
    },
    /// First maximum principle on a probe grid.
    MaxPrinciple {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        probe: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// N-point energy minimization.
    Minimize {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        n: Option<usize>,
        /// `gradient` or `anneal`; annealing is the default for Riesz `s ≤ −2`.
        #[arg(long)]
        optimizer: Option<String>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        moves: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Start from the regular lattice.
        #[arg(long)]
        lattice: bool,
        /// Start from a configuration CSV (e.g. an earlier `points.csv`).
        #[arg(long)]
        init_file: Option<PathBuf>,
        /// Exit with 3 when the regime check fails.
        #[arg(long)]
        expect_regime: bool,
    },
    /// Cosine Fourier coefficients of a profile.
    Fourier {
        /// Profile JSON file (a profile spec, or a config with a "profile" block).
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        resolution: Option<usize>,
        /// Exit with 3 when some coefficient is negative.
        #[arg(long)]
        expect_nonnegative: bool,
    },
    /// Spot checks of the profile conditions.
    CheckProfile {
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// G-ratio of two unsigned measures and the energy of their difference.
    GRatio {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long)]
        nu: Option<PathBuf>,
    },
}

/// Result of a command: whether its verdict passed.
pub enum Outcome {
    Pass,
    Fail,
}

fn run(cli: Cli) -> Result<Outcome> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global()?;
    }
    commands::dispatch(cli.command, cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
