//! branchpoint-lab: command-line front end for the two-level non-Hermitian
//! model. Emits CSV/JSON artifacts for external plotting; diagnostics go to
//! stderr only (BPL_LOG in {error, info, debug}).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::Config;

/// CSV/JSON layout version tag written as the first line of data files.
pub const FORMAT_VERSION: &str = "# branchpoint-lab v1";

#[derive(Debug, Parser)]
#[command(
    name = "branchpoint-lab",
    version,
    about = "Exceptional-point laboratory for a two-level non-Hermitian model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print crossing, EP locations, critical coupling and regimes.
    Classify(CommonOpts),
    /// Locate an EP numerically (Newton on F = 0) and cross-check the analytic formula.
    #[command(name = "find-ep")]
    FindEp(CommonOpts),
    /// Trace both eigenbranches along a segment or loop; write trace.csv.
    Trace(CommonOpts),
    /// Monodromy of a loop or preset experiment; JSON report.
    Monodromy(CommonOpts),
    /// Evaluate F, eigenvalues and regime over a (lambda, omega) grid; write sweep.csv.
    Sweep(CommonOpts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct CommonOpts {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for data files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format where a choice exists.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Override the step count (trace, monodromy).
    #[arg(long)]
    steps: Option<usize>,
    /// Preset experiment name (monodromy): EpOnce, EpTwice, EpReversed, DpOnce.
    #[arg(long)]
    preset: Option<String>,
}

/// Error carrying the exit-code contract:
/// 2 config, 3 precondition, 4 no-convergence, 5 path-through-EP, 1 other.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Precondition(String),
    NoConvergence(String),
    PathThroughEp(String),
    Other(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Other(_) => 1,
            CliError::Config(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::NoConvergence(_) => 4,
            CliError::PathThroughEp(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Precondition(m)
            | CliError::NoConvergence(m)
            | CliError::PathThroughEp(m)
            | CliError::Other(m) => m,
        }
    }
}

impl From<branchpoint_core::ModelError> for CliError {
    fn from(e: branchpoint_core::ModelError) -> Self {
        use branchpoint_core::ModelError::*;
        match e {
            ParallelLevels | DegenerateToDP => CliError::Precondition(e.to_string()),
            InvalidParams(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<branchpoint_core::SearchError> for CliError {
    fn from(e: branchpoint_core::SearchError) -> Self {
        use branchpoint_core::SearchError::*;
        match e {
            Model(m) => m.into(),
            NoConvergence { .. } | SingularJacobian { .. } => {
                CliError::NoConvergence(e.to_string())
            }
            NonFinite => CliError::Config(e.to_string()),
        }
    }
}

impl From<branchpoint_core::TrackError> for CliError {
    fn from(e: branchpoint_core::TrackError) -> Self {
        use branchpoint_core::TrackError::*;
        match e {
            PathThroughEp => CliError::PathThroughEp(e.to_string()),
            BadPath(_) | NonFinite => CliError::Config(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<branchpoint_core::LoopError> for CliError {
    fn from(e: branchpoint_core::LoopError) -> Self {
        use branchpoint_core::LoopError::*;
        match e {
            Track(t) => t.into(),
            BadSpec(_) => CliError::Config(e.to_string()),
            DegenerateBasis | PresetPreconditionViolated(_) | BranchNotClosed | GaugeMismatch => {
                CliError::Precondition(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(format!("i/o error: {e}"))
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (opts, cmd): (&CommonOpts, _) = match &cli.command {
        Command::Classify(o) => (o, commands::classify as commands::CommandFn),
        Command::FindEp(o) => (o, commands::find_ep),
        Command::Trace(o) => (o, commands::trace),
        Command::Monodromy(o) => (o, commands::monodromy),
        Command::Sweep(o) => (o, commands::sweep),
    };
    let config = Config::load(opts.config.as_deref()).map_err(CliError::Config)?;
    cmd(&config, opts)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BPL_LOG", "error")).init();

    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("branchpoint-lab: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
