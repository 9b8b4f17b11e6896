//! Command-line front end for `qwork-core`: reference sweeps, single-point
//! reports, the minimum-uncertainty scan and a self-verification suite.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::{Overrides, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error(transparent)]
    Core(#[from] qwork_core::Error),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for anything the user can fix in the configuration, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Core(_) | CliError::Json(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qwork", version, about = "Work statistics and predictability/coherence duality for a driven qubit")]
pub struct Cli {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sigma sweep for each theta, one data file per theta.
    Fig1(Overrides),
    /// Duality report for the first theta and the chosen scheme.
    Report(Overrides),
    /// Cross-checks against the brute-force references; exit 1 on failure.
    Verify(Overrides),
    /// Theta x sigma table and the state maximising d_w + v_w.
    Scan(Overrides),
}

pub const THREADS_VAR: &str = "QWORK_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR}: expected a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("{THREADS_VAR}: {e}")))
}

/// Runs the parsed command and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    match execute(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("qwork: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let file = cli.config.as_deref();
    match cli.command {
        Command::Fig1(o) => {
            let cfg = RunConfig::load(file, o)?;
            for path in commands::fig1(&cfg)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Report(o) => commands::report(&RunConfig::load(file, o)?).map(|()| true),
        Command::Verify(o) => commands::verify(&RunConfig::load(file, o)?),
        Command::Scan(o) => commands::scan(&RunConfig::load(file, o)?).map(|()| true),
    }
}
