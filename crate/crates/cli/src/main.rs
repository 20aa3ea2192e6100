//! `arnold-lab` command-line frontend.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use arnold_lab::{LabError, Mapping, ProfileKind};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

/// Variational stability diagnostics for radial planar vortices.
#[derive(Parser, Debug)]
#[command(name = "arnold-lab", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand; they override the config file.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Vortex profile: gaussian, algebraic or custom.
    #[arg(long, global = true)]
    pub profile: Option<ProfileKind>,
    /// Decay exponent of the algebraic profile.
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Number of radial nodes.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Outer radius of the grid.
    #[arg(long, global = true)]
    pub rmax: Option<f64>,
    /// Grid mapping: uniform_r, log_r or uniform_s.
    #[arg(long, global = true)]
    pub mapping: Option<Mapping>,
    /// Angular truncation.
    #[arg(long, global = true)]
    pub kmax: Option<usize>,
    /// Seed of every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for the JSON summary and CSV tables.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate the profile and its weights at the positive grid nodes.
    Profile,
    /// Optimal weighted Hardy constant.
    Hardy,
    /// Spectrum of one of the radial operators.
    Spectrum {
        /// btilde1, lk, kernel or quasimode.
        #[arg(long)]
        operator: Option<String>,
        /// Angular mode of `lk`.
        #[arg(long)]
        k: Option<i32>,
    },
    /// Quadratic and cubic forms of a seeded random perturbation of the Gaussian vortex.
    Forms,
    /// Energy of the profile by three routes and the log-HLS gap.
    Energy,
    /// Free-energy maximizer for the profile's entropy.
    Maximize {
        /// Total circulation.
        #[arg(long)]
        mass: Option<f64>,
    },
    /// Evolve a perturbation of the Oseen vortex.
    Evolve,
    /// Run acceptance checks.
    Verify {
        /// `all`, or comma separated names or numbers.
        #[arg(long)]
        suite: Option<String>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Invalid(_) | LabError::Domain(_) => CliError::Validation(e.to_string()),
            LabError::NonConvergence(_) | LabError::Breakdown(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(format!("json: {e}"))
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("ARNOLD_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Validation(format!("ARNOLD_LAB_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    output::START.get_or_init(std::time::Instant::now);
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match init_threads().and_then(|_| commands::dispatch(&cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
