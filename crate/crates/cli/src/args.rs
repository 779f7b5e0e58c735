//! Argument grammar.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "cauchykit",
    version,
    about = "Cauchy-distribution toolkit: transform statistics, estimators, goodness-of-fit tests, identity verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistKind {
    Cauchy,
    Circular,
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    Mle,
    Mellin,
    Logmoment,
    Mixture,
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodKind {
    Mobius,
    Mellin,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw observations from an analytic law (CSV, one value per line).
    Sample {
        #[arg(long, value_enum)]
        dist: DistKind,
        /// Cauchy parameter as a complex literal, e.g. 0+1i (requires Im > 0).
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
        /// Circular-Cauchy parameter, |w| < 1.
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
        /// Mixture weight of the second component, in (0, 1).
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        gamma1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        gamma2: Option<String>,
        /// Number of draws.
        #[arg(short = 'n', long = "n")]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path (default: stdout). Written atomically.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a parameter to observations read from a CSV file.
    Fit {
        #[arg(long, value_enum)]
        estimator: EstimatorKind,
        /// Input CSV (angles in radians for the circular estimator).
        #[arg(long = "in")]
        input: PathBuf,
        /// Exponent grid: comma list `0.1,0.2,...` or triple `start:stop:count`.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit the JSON report instead of the human-readable summary.
        #[arg(long)]
        json: bool,
    },
    /// Goodness-of-fit test against the Cauchy null (JSON report).
    Test {
        #[arg(long, value_enum)]
        method: MethodKind,
        #[arg(long = "in")]
        input: PathBuf,
        /// Bootstrap replications.
        #[arg(long = "B", default_value_t = 999)]
        b: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Gamma grid (complex literals) for mobius; exponent grid for mellin.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Machine-verify the analytic identities; exit 2 if any family fails.
    Verify {
        /// Comma list of complex literals (default 3x3 grid).
        #[arg(long = "gamma-grid", allow_hyphen_values = true)]
        gamma_grid: Option<String>,
        /// Comma list or triple of exponents in [0, 1) (default 0.1..0.9).
        #[arg(long = "a-grid")]
        a_grid: Option<String>,
        /// Emit the machine JSON array instead of the table.
        #[arg(long = "tol-report")]
        tol_report: bool,
    },
    /// Tabulate the Möbius statistic field F_X over a gamma grid (CSV).
    Field {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma list of complex grid points (required).
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}
