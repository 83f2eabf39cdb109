//! Command-line front end for the `elkies` library.
//!
//! Every subcommand writes its data files (CSV/JSON) into the output
//! directory together with a `manifest.json` describing the run, and prints
//! a short summary on stdout. Data files never contain timings, so a rerun
//! with the same parameters reproduces them byte for byte.

mod commands;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

pub use commands::run;
pub use output::RunManifest;

/// Environment variable holding the default work budget.
pub const BUDGET_ENV: &str = "ELKIES_BUDGET";

#[derive(Debug, Parser)]
#[command(
    name = "elkies",
    version,
    about = "Elkies/Atkin primes, L_p and character sums over prime fields"
)]
pub struct Cli {
    /// Directory receiving the output files.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the odd primes up to L for a trace pair or a curve.
    Classify(ClassifyArgs),
    /// Scan a prime range for traces with a large L_p.
    Scan(ScanArgs),
    /// Run one of the identity / bound checks.
    Verify(VerifyArgs),
    /// Distribution of N_e / pi(L) over random curves.
    Heuristic(HeuristicArgs),
    /// Evaluate the sieve sum W both ways and tabulate S(m).
    Wsum(WsumArgs),
    /// Represent odd n as 4p - t^2, or list the exceptions in a range.
    Represent(RepresentArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub p: u64,
    /// Trace of Frobenius; alternative to giving a curve.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["a", "b"])]
    pub t: Option<i64>,
    #[arg(long, requires = "b")]
    pub a: Option<u64>,
    #[arg(long, requires = "a")]
    pub b: Option<u64>,
    /// Classification bound.
    #[arg(long = "L", default_value_t = 100)]
    pub bound: u64,
    /// Count primes dividing t^2 - 4p as Elkies.
    #[arg(long)]
    pub ramified_as_elkies: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long)]
    pub lo: u64,
    #[arg(long)]
    pub hi: u64,
    #[arg(long, default_value_t = 200)]
    pub lcap: u64,
    /// `all-traces` or `hasse-sample:<k>`.
    #[arg(long, default_value = "all-traces")]
    pub mode: String,
    /// Minimal L_p / log p to report.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, env = BUDGET_ENV, default_value_t = elkies::search::DEFAULT_SCAN_BUDGET)]
    pub budget: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Interval `M:L` on which to test for the absence of Elkies primes.
    #[arg(long)]
    pub cond: Option<String>,
    #[arg(long)]
    pub ramified_as_elkies: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyTarget {
    Deuring,
    LemmaLong,
    LemmaShort,
    Gcd,
    CompleteSum,
    WEquality,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    pub target: VerifyTarget,
    /// Largest prime for the trace-realisability sweep.
    #[arg(long, default_value_t = 500)]
    pub max_p: u64,
    /// Largest modulus (defaults: 10^4 complete-sum, 10^3 lemma-short,
    /// 301 lemma-long, 100 gcd).
    #[arg(long)]
    pub max_m: Option<u64>,
    /// Random queries for lemma-short.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Random residues per modulus for complete-sum.
    #[arg(long, default_value_t = 10)]
    pub per_m: usize,
    /// Upper end of u, v for the gcd sweep.
    #[arg(long, default_value_t = 50)]
    pub uv_max: i64,
    /// Largest r tried for lemma-short.
    #[arg(long, default_value_t = 6)]
    pub max_r: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long = "Q", default_value_t = 1000)]
    pub q: u64,
    #[arg(long = "M", default_value_t = 3)]
    pub m: u64,
    #[arg(long = "L", default_value_t = 11)]
    pub l: u64,
    #[arg(long = "T", default_value_t = 31)]
    pub t: u64,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, env = BUDGET_ENV, default_value_t = elkies::charsums::DEFAULT_WORK_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HeuristicArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub lo: u64,
    #[arg(long, default_value_t = 2_000_000)]
    pub hi: u64,
    #[arg(long = "L", default_value_t = 1000)]
    pub bound: u64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WsumArgs {
    #[arg(long = "Q")]
    pub q: u64,
    /// Explicit M; with L and T it overrides the asymptotic parameters.
    #[arg(long = "M", requires_all = ["l", "t"])]
    pub m: Option<u64>,
    #[arg(long = "L", requires_all = ["m", "t"])]
    pub l: Option<u64>,
    #[arg(long = "T", requires_all = ["m", "l"])]
    pub t: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, env = BUDGET_ENV, default_value_t = elkies::charsums::DEFAULT_WORK_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RepresentArgs {
    /// A single odd n to represent.
    #[arg(long, conflicts_with_all = ["lo", "hi"])]
    pub n: Option<u64>,
    /// Coverage sweep lower end.
    #[arg(long, requires = "hi")]
    pub lo: Option<u64>,
    #[arg(long, requires = "lo")]
    pub hi: Option<u64>,
    #[arg(long, env = BUDGET_ENV, default_value_t = 10_000_000)]
    pub budget: u64,
}

pub const DEFAULT_SEED: u64 = 20_120_101;

/// How a completed run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Truncated,
    VerificationFailed,
}

#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    /// Human summary printed on stdout.
    pub summary: String,
    pub manifest: RunManifest,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Budget(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl From<elkies::Error> for CliError {
    fn from(e: elkies::Error) -> Self {
        match e {
            elkies::Error::Resource { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DOMAIN: i32 = 2;
    pub const BUDGET: i32 = 3;
    pub const VERIFY_FAILED: i32 = 4;
}

pub fn exit_code(result: &Result<Outcome, CliError>) -> i32 {
    match result {
        Ok(o) => match o.status {
            Status::Ok => exit::OK,
            Status::Truncated => exit::BUDGET,
            Status::VerificationFailed => exit::VERIFY_FAILED,
        },
        Err(CliError::Usage(_)) => exit::USAGE,
        Err(CliError::Domain(_)) | Err(CliError::Io(_)) => exit::DOMAIN,
        Err(CliError::Budget(_)) => exit::BUDGET,
    }
}
