// `!(a > b)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

mod config;
mod experiment;
mod output;
mod plot;
mod spectrum_cmd;
mod sweep_cmd;
mod validate_cmd;

use config::{ConfigError, ExperimentConfig};
use output::Reporter;

/// Measurement-damped tunneling in an rf-SQUID double well.
#[derive(Parser, Debug)]
#[command(name = "fluxdamp", version)]
struct Cli {
    /// TOML experiment file; the built-in default is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Trajectory seed (overrides trajectories.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Basis size (overrides levels).
    #[arg(long, global = true)]
    levels: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the well and write energies and eigenfunctions.
    Spectrum,
    /// Closed-form ⟨x(t)⟩ for each configured κ_E.
    Sweep,
    /// Check the closed form against the integrator and the jump ensemble.
    Validate,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::parse(config::DEFAULT_CONFIG)?,
    };
    if let Some(n) = cli.levels {
        cfg.levels = n;
    }
    if let Some(seed) = cli.seed {
        cfg.trajectories.get_or_insert_with(Default::default).seed = seed;
    }
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load(cli)?;
    let report = Reporter { quiet: cli.quiet };
    let out = cfg.output.dir.clone();
    match cli.command {
        Command::Spectrum => spectrum_cmd::run(&cfg, &out, &report),
        Command::Sweep => sweep_cmd::run(&cfg, &out, &report),
        Command::Validate => validate_cmd::run(&cfg, &out, &report),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
