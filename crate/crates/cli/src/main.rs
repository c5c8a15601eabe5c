//! `siglo` — scenario runner for signed-measure average-distance problems.
//!
//! ```text
//! siglo run <config.json>        run a scenario file
//! siglo example <name>           run a built-in scenario
//! siglo validate                 invariant suites + acceptance battery
//! siglo theta --n 2 --k 256      quantization coefficient estimate
//! ```
//!
//! Exit codes: 0 success, 1 runtime failure or failed validation checks,
//! 2 invalid configuration or usage, 3 violated solver precondition
//! (attraction mass not strictly dominant).
//!
//! `SIGLO_THREADS` caps internal parallelism; results are identical for any
//! thread count.

mod config;
mod examples;
mod output;
mod tasks;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{0}")]
    Failure(String),
    #[error("failed checks: {}", .0.join(", "))]
    ChecksFailed(Vec<String>),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Failure(_) | CliError::ChecksFailed(_) => 1,
        }
    }
}

impl From<siglo_core::solve_k::SolveError> for CliError {
    fn from(e: siglo_core::solve_k::SolveError) -> Self {
        use siglo_core::solve_k::SolveError as E;
        match e {
            E::MassDominance { .. } => CliError::Precondition(e.to_string()),
            E::BadConfig(_) | E::EnumerationCap { .. } => CliError::Invalid(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<siglo_core::region::RegionError> for CliError {
    fn from(e: siglo_core::region::RegionError) -> Self {
        use siglo_core::region::RegionError as E;
        match e {
            E::Solve(inner) => inner.into(),
            E::NotAtomic | E::BadMesh(_) | E::BadTarget { .. } => CliError::Invalid(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<siglo_core::asymptotics::AsymptoticsError> for CliError {
    fn from(e: siglo_core::asymptotics::AsymptoticsError) -> Self {
        use siglo_core::asymptotics::AsymptoticsError as E;
        match e {
            E::Solve(inner) => inner.into(),
            E::BadDimension(_) | E::BadSchedule | E::ZeroSupportMass | E::GridMismatch => {
                CliError::Invalid(e.to_string())
            }
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<siglo_core::measure::MeasureError> for CliError {
    fn from(e: siglo_core::measure::MeasureError) -> Self {
        use siglo_core::measure::MeasureError as E;
        match e {
            E::MassMismatch { .. } => CliError::Failure(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<siglo_core::geometry::GeometryError> for CliError {
    fn from(e: siglo_core::geometry::GeometryError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<siglo_core::objective::ObjectiveError> for CliError {
    fn from(e: siglo_core::objective::ObjectiveError) -> Self {
        CliError::Failure(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "siglo",
    version,
    about = "Signed-measure average-distance problems: solvers, regions, certificates, asymptotics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config file.
    Run {
        /// Path to the scenario JSON.
        config: PathBuf,
        /// Output directory (overrides the config's `output`).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a built-in scenario by name.
    Example {
        /// One of: fermat-weber-4.6, nonexistence-3.2, canonical-4.4.
        name: String,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Seed for solver restarts inside the example.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the invariant suites and the acceptance battery; exit 0 iff all
    /// checks pass.
    Validate {
        /// Randomized trials per invariant suite.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Override the 1-D quantization constant used as the reference
        /// (exercises the failure path).
        #[arg(long)]
        theta1: Option<f64>,
        /// Override the 2-D quantization constant used as the reference.
        #[arg(long)]
        theta2: Option<f64>,
        /// Run only checks whose id contains this substring.
        #[arg(long)]
        only: Option<String>,
        /// Also write the table as a results.json under this directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Estimate the quantization coefficient θ_n.
    Theta {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        grid_res: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn init_threads() {
    if let Ok(raw) = std::env::var("SIGLO_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("siglo: ignoring SIGLO_THREADS={raw:?} (want a positive integer)"),
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, output } => {
            let scenario = config::load_scenario(&config)?;
            tasks::run_scenario(&scenario, output)
        }
        Command::Example { name, output, seed } => {
            let out = output.unwrap_or_else(|| PathBuf::from("siglo-out").join(&name));
            examples::run(&name, seed, out)
        }
        Command::Validate { trials, theta1, theta2, only, output } => {
            tasks::run_validate(&tasks::ValidateOpts { trials, theta1, theta2, only, output })
        }
        Command::Theta { n, k, restarts, seed, grid_res, output } => {
            tasks::run_theta_command(n, k, restarts, seed, grid_res, output)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    init_threads();
    match dispatch(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("siglo: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
