use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

use crate::functions::TruthTableFunction;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "djsim",
    version,
    about = "Exact and Monte Carlo failure probabilities for the ensemble Deutsch-Jozsa scheme and the classical random algorithm"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Exact failure probabilities over an (n, M, R) sweep.
    Exact(SweepArgs),
    /// Monte Carlo of the ensemble protocol next to the exact formula.
    SimulateEnsemble(SweepArgs),
    /// Monte Carlo of the classical random algorithm next to the exact formula.
    SimulateClassical(SweepArgs),
    /// Exact values, both simulations and the separation verdict.
    Compare(SweepArgs),
    /// Density-matrix identities, exhaustive for n <= 3 and sampled above.
    QuantumCheck(SweepArgs),
    /// List every balanced truth table.
    Enumerate(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Exact(_) => "exact",
            Command::SimulateEnsemble(_) => "simulate-ensemble",
            Command::SimulateClassical(_) => "simulate-classical",
            Command::Compare(_) => "compare",
            Command::QuantumCheck(_) => "quantum-check",
            Command::Enumerate(_) => "enumerate",
        }
    }

    pub fn args(&self) -> &SweepArgs {
        match self {
            Command::Exact(a)
            | Command::SimulateEnsemble(a)
            | Command::SimulateClassical(a)
            | Command::Compare(a)
            | Command::QuantumCheck(a)
            | Command::Enumerate(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// Argument-register widths: `3`, `3..5`.
    #[arg(long = "n", default_value = "3")]
    pub n: IntRange,

    /// Molecule count / query budget. An open end (`2..`) runs to N/2
    /// (N for simulate-classical).
    #[arg(long = "m-range", default_value = "1..")]
    pub m_range: IntRange,

    /// Resolution. An open end runs to M; values above M are skipped.
    #[arg(long = "r-range", default_value = "1")]
    pub r_range: IntRange,

    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Override the subcommand's bound on n (never above its hard limit).
    #[arg(long = "max-n-guard")]
    pub max_n_guard: Option<u32>,

    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,

    /// simulate-ensemble: run every trial against this table (`n=<n>:<hex>`)
    /// instead of a fresh random balanced function.
    #[arg(long = "fixed-function")]
    #[serde(serialize_with = "serialize_display_opt")]
    pub fixed_function: Option<TruthTableFunction>,
}

fn serialize_display_opt<S: Serializer, T: fmt::Display>(
    v: &Option<T>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Inclusive integer range; `end = None` means "up to the natural bound".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntRange {
    pub start: u64,
    pub end: Option<u64>,
}

impl IntRange {
    pub fn single(v: u64) -> Self {
        Self { start: v, end: Some(v) }
    }

    pub fn new(start: u64, end: u64) -> Self {
        Self { start, end: Some(end) }
    }

    pub fn open(start: u64) -> Self {
        Self { start, end: None }
    }

    /// Values up to `natural` when open-ended.
    pub fn values(&self, natural: u64) -> std::ops::RangeInclusive<u64> {
        self.start..=self.end.unwrap_or(natural)
    }
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |v: &str| {
            v.trim()
                .parse::<u64>()
                .map_err(|_| format!("invalid integer {v:?} in range {s:?}"))
        };
        let range = match s.split_once("..") {
            None => IntRange::single(parse(s)?),
            Some((a, "")) => IntRange::open(parse(a)?),
            Some((a, b)) => IntRange::new(parse(a)?, parse(b.trim_start_matches('='))?),
        };
        if let Some(end) = range.end {
            if end < range.start {
                return Err(format!("empty range {s:?}"));
            }
        }
        Ok(range)
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.end {
            Some(e) if e == self.start => write!(f, "{e}"),
            Some(e) => write!(f, "{}..{e}", self.start),
            None => write!(f, "{}..", self.start),
        }
    }
}

impl Serialize for IntRange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!("3".parse::<IntRange>().unwrap(), IntRange::single(3));
        assert_eq!("2..5".parse::<IntRange>().unwrap(), IntRange::new(2, 5));
        assert_eq!("2..=5".parse::<IntRange>().unwrap(), IntRange::new(2, 5));
        assert_eq!("2..".parse::<IntRange>().unwrap(), IntRange::open(2));
        assert!("5..2".parse::<IntRange>().is_err());
        assert!("x".parse::<IntRange>().is_err());
        assert_eq!(IntRange::open(2).values(4).collect::<Vec<_>>(), [2, 3, 4]);
        assert_eq!(IntRange::new(2, 5).to_string(), "2..5");
    }

    #[test]
    fn parses_command_line() {
        let cli = Cli::try_parse_from([
            "djsim", "compare", "--n", "3..5", "--m-range", "2..", "--r-range", "1..3", "--seed", "7",
        ])
        .unwrap();
        assert_eq!(cli.command.name(), "compare");
        let a = cli.command.args();
        assert_eq!(a.n, IntRange::new(3, 5));
        assert_eq!(a.seed, 7);
        assert_eq!(a.format, Format::Csv);

        let cli = Cli::try_parse_from(["djsim", "simulate-ensemble", "--fixed-function", "n=2:6"]).unwrap();
        assert!(cli.command.args().fixed_function.is_some());
        assert!(Cli::try_parse_from(["djsim", "exact", "--format", "xml"]).is_err());
    }
}
