//! `coherence`: compute the modified trace distance of coherence on state
//! files, sample random states, run proportion sweeps, emit figure data
//! and run the verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse or usage error,
//! 3 invariant violation. `COHERENCE_THREADS` sets the worker count.

mod commands;
mod output;

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use coherence_core::Error;

pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "coherence", version, about = "Modified trace distance of coherence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a measure on a state file.
    Compute(ComputeArgs),
    /// Draw random states and write them as state files.
    Sample(SampleArgs),
    /// Estimate the proportion of states with value one over (n, k).
    Sweep(SweepArgs),
    /// Emit plot-ready CSV for one of the figures.
    Figure(FigureArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Measure {
    L1,
    Tr,
    ModTr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    ClosedForm,
    Solver,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    PureFormula,
    Qubit,
    Duality,
    BlockAdditivity,
    ProperMeasure,
    Gradient,
}

#[derive(Args)]
pub struct ComputeArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, value_enum, default_value = "mod-tr")]
    pub measure: Measure,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: Method,
    /// Allowed closed-form/solver disagreement for `--method auto`.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Args)]
pub struct SampleArgs {
    #[arg(long, value_parser = parse_range)]
    pub dims: RangeInclusive<usize>,
    #[arg(long, value_parser = parse_range, default_value = "1")]
    pub ranks: RangeInclusive<usize>,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_range, default_value = "2..10")]
    pub dims: RangeInclusive<usize>,
    #[arg(long, value_parser = parse_range, default_value = "1..3")]
    pub ranks: RangeInclusive<usize>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Classification tolerance: values at least `1 - tol` count as one.
    #[arg(long, default_value_t = coherence_core::solver::CLASSIFICATION_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub which: Figure,
    /// Sweep ranges for fig3.
    #[arg(long, value_parser = parse_range, default_value = "2..30")]
    pub dims: RangeInclusive<usize>,
    #[arg(long, value_parser = parse_range, default_value = "1..3")]
    pub ranks: RangeInclusive<usize>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = coherence_core::solver::CLASSIFICATION_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Samples (per dimension where the suite takes dimensions).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_parser = parse_range, default_value = "2..12")]
    pub dims: RangeInclusive<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Where to write the worst offender on failure (default: stderr).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `A..B` (inclusive) or a single `A`.
fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a nonnegative integer"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let a = parse(s)?;
            (a, a)
        }
    };
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok(a..=b)
}

/// A failed command: message for stderr plus exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::InvalidArgument(_) => EXIT_PARSE,
            Error::NotHermitian { .. }
            | Error::Invariant(_)
            | Error::DimensionMismatch(_)
            | Error::InfeasibleCertificate { .. } => EXIT_INVARIANT,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_PARSE, e.to_string())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("COHERENCE_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::new(EXIT_PARSE, format!("COHERENCE_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Compute(a) => commands::compute(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Figure(a) => commands::figure(&a),
        Command::Verify(a) => commands::verify(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..6").unwrap(), 2..=6);
        assert_eq!(parse_range("2..=6").unwrap(), 2..=6);
        assert_eq!(parse_range("4").unwrap(), 4..=4);
        assert!(parse_range("6..2").is_err());
        assert!(parse_range("a..2").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
