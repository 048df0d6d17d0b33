//! Command-line front end. Exit codes: 0 pass, 1 validity failure, 2 input
//! error, 3 evaluation error, 4 inconclusive.

mod commands;
pub mod config;
mod io;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use commands::{cmd_estimate, cmd_eval, cmd_sample, cmd_validate};
pub use config::{parse_config, ConfigError, Expr, Model, ModelConfig};
pub use io::{format_float, RunManifest};

/// Stable exit codes for scripting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitStatus {
    Pass = 0,
    Fail = 1,
    Input = 2,
    Eval = 3,
    Inconclusive = 4,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("validity failure: {0}")]
    Fail(String),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            Self::Input(_) => ExitStatus::Input,
            Self::Eval(_) => ExitStatus::Eval,
            Self::Fail(_) => ExitStatus::Fail,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "covkit", version, about = "Matrix-valued covariance models: evaluate, validate, sample, estimate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Pd,
    Cnd,
    Pcv,
    Roundtrip,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the model on every ordered pair of points.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a definiteness claim on random configurations.
    Validate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 20)]
        configs: usize,
        #[arg(long, default_value_t = 12)]
        points_max: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Schoenberg parameters for `roundtrip`.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0, 10.0])]
        t_grid: Vec<f64>,
        /// Sampling box `[lower, upper]` in every coordinate.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [-2.0, 2.0])]
        bounds: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw Gaussian realizations at the given points.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        reals: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip the definiteness check before factorizing.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Empirical pseudo cross-variogram of sampled realizations.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        /// Location `k` sits at `k * spacing` on a line unless `--points` is given.
        #[arg(long)]
        grid_spacing: f64,
        /// CSV of lag vectors with header `h1..hd`.
        #[arg(long)]
        lags: PathBuf,
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        batches: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args`, runs the command and returns its exit status. Messages go
/// to stderr.
pub fn run<I, T>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::Input } else { ExitStatus::Pass };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("{e}");
        return e.status();
    }
    let result = match cli.command {
        Command::Eval { model, points, out } => cmd_eval(&model, &points, &out),
        Command::Validate { model, mode, configs, points_max, tol, seed, t_grid, bounds, out } => {
            cmd_validate(&model, mode, configs, points_max, tol, seed, &t_grid, (bounds[0], bounds[1]), &out)
        }
        Command::Sample { model, points, reals, seed, force, out } => cmd_sample(&model, &points, reals, seed, force, &out),
        Command::Estimate { input, grid_spacing, lags, points, batches, out } => {
            cmd_estimate(&input, grid_spacing, &lags, points.as_deref(), batches, &out)
        }
    };
    match result {
        Ok(status) => status,
        Err(e) => {
            eprintln!("{e}");
            e.status()
        }
    }
}

/// `COVKIT_THREADS` caps the worker pool; 0 or unset means automatic.
fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("COVKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| CliError::Input(format!("COVKIT_THREADS must be a non-negative integer, got {v:?}")))?;
    if n > 0 {
        // A pool built earlier in the same process stays in place.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
