//! Experiment runner behind the `djsim` binary.
//!
//! [`execute`] does the work and renders the report in memory; [`run`] adds
//! the file I/O, the metadata record and the exit status (0 success, 1 a
//! check failed, 2 usage error).

mod args;
pub mod quantum_check;
pub mod report;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use serde_json::json;

pub use args::{Cli, Command, Format, IntRange, SweepArgs};
use report::{
    render_csv, CheckRow, ComparisonRow, ExactRow, CHECK_COLUMNS, COMPARISON_COLUMNS,
    ENUMERATE_COLUMNS, EXACT_COLUMNS,
};

use crate::classical_sim::estimate_classical_fail;
use crate::ensemble_sim::{estimate_fail_prob_with, EnsembleParams, FunctionMode};
use crate::estimate::McEstimate;
use crate::exact::{
    classical_fail_prob, ensemble_fail_prob, failure_fraction, separation_bound, verify_separation,
    Relation, MAX_EXACT_QUBITS,
};
use crate::functions::{enumerate_balanced, DEFAULT_ENUMERATION_GUARD, MAX_LAZY_QUBITS, MAX_TABLE_QUBITS};
use crate::quantum::MAX_QUANTUM_QUBITS;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Simulations refuse fewer trials than this.
pub const MIN_TRIALS: u64 = 100;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(crate::Error::Domain(_) | crate::Error::ResourceLimit { .. }) => EXIT_USAGE,
            CliError::Core(_) | CliError::Io { .. } => EXIT_CHECK_FAILED,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// A rendered report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub body: String,
    pub rows: usize,
    /// False when a requested check failed.
    pub passed: bool,
    pub verdict: Option<String>,
}

/// Bounds on `n`: the default guard and the hard limit a guard override may reach.
fn n_limits(cmd: &Command) -> (u32, u32) {
    match cmd {
        Command::Exact(_) | Command::Compare(_) => (MAX_EXACT_QUBITS, MAX_EXACT_QUBITS),
        Command::SimulateEnsemble(_) | Command::SimulateClassical(_) => (MAX_LAZY_QUBITS, MAX_LAZY_QUBITS),
        Command::QuantumCheck(_) => (MAX_QUANTUM_QUBITS, MAX_QUANTUM_QUBITS),
        Command::Enumerate(_) => (DEFAULT_ENUMERATION_GUARD, MAX_TABLE_QUBITS),
    }
}

fn n_values(cmd: &Command) -> Result<Vec<u32>, CliError> {
    let a = cmd.args();
    let (default_guard, hard) = n_limits(cmd);
    let guard = match a.max_n_guard {
        Some(g) if g > hard => {
            return Err(usage(format!(
                "--max-n-guard {g} exceeds the hard limit {hard} for {}",
                cmd.name()
            )))
        }
        Some(g) => g,
        None => default_guard,
    };
    let end = a
        .n
        .end
        .ok_or_else(|| usage("--n needs a closed range such as 3..5"))?;
    if a.n.start == 0 {
        return Err(usage("--n must start at 1 or more"));
    }
    if end > guard as u64 {
        return Err(usage(format!(
            "n = {end} exceeds the bound {guard} for {} (see --max-n-guard)",
            cmd.name()
        )));
    }
    Ok((a.n.start as u32..=end as u32).collect())
}

/// The `(n, M, R)` grid, validated before any work starts.
fn sweep(cmd: &Command, m_natural: fn(u64) -> u64, m_max: fn(u64) -> u64) -> Result<Vec<(u32, u64, u64)>, CliError> {
    let a = cmd.args();
    let mut cells = Vec::new();
    for n in n_values(cmd)? {
        let big_n = 1u64 << n;
        let ms = a.m_range.values(m_natural(big_n));
        if ms.is_empty() {
            return Err(usage(format!("M range {} is empty at n = {n}", a.m_range)));
        }
        for m in ms {
            if m == 0 || m > m_max(big_n) {
                return Err(usage(format!(
                    "M = {m} outside 1..={} at n = {n}",
                    m_max(big_n)
                )));
            }
            if a.r_range.start == 0 {
                return Err(usage("R must be at least 1"));
            }
            for r in a.r_range.values(m) {
                if r <= m {
                    cells.push((n, m, r));
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(usage("the sweep contains no (n, M, R) with R <= M"));
    }
    Ok(cells)
}

fn half(big_n: u64) -> u64 {
    big_n / 2
}

fn whole(big_n: u64) -> u64 {
    big_n
}

fn unbounded(_: u64) -> u64 {
    u32::MAX as u64
}

fn check_trials(a: &SweepArgs) -> Result<(), CliError> {
    if a.trials < MIN_TRIALS {
        return Err(usage(format!("--trials must be at least {MIN_TRIALS}")));
    }
    Ok(())
}

/// SplitMix64 finalizer; derives stable per-row seeds from the user seed.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn row_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(seed), |acc, &p| mix(acc ^ p))
}

fn render(format: Format, columns: &[&str], records: Vec<Vec<String>>, json_rows: Vec<serde_json::Value>, cmd: &Command, verdict: Option<&str>, passed: bool) -> String {
    match format {
        Format::Csv => render_csv(columns, records),
        Format::Json => {
            let doc = json!({
                "command": cmd.name(),
                "rows": json_rows,
                "verdict": verdict,
                "passed": passed,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("serializable report");
            s.push('\n');
            s
        }
    }
}

pub fn cmd_exact(cmd: &Command) -> Result<Outcome, CliError> {
    let cells = sweep(cmd, half, half)?;
    let rows = cells
        .into_iter()
        .map(|(n, m, r)| exact_row(n, m, r))
        .collect::<Result<Vec<_>, _>>()?;
    let a = cmd.args();
    let body = render(
        a.format,
        &EXACT_COLUMNS,
        rows.iter().map(ExactRow::csv_record).collect(),
        rows.iter().map(ExactRow::json).collect(),
        cmd,
        None,
        true,
    );
    Ok(Outcome {
        body,
        rows: rows.len(),
        passed: true,
        verdict: None,
    })
}

pub fn exact_row(n: u32, m: u64, r: u64) -> crate::Result<ExactRow> {
    Ok(ExactRow {
        n,
        m,
        r,
        failure_fraction: Some(failure_fraction(n, m)?),
        p_ensemble: ensemble_fail_prob(m, r)?,
        p_classical: classical_fail_prob(n, m)?,
        bound: separation_bound(m)?,
        separation: Some(verify_separation(n, m, r)?),
    })
}

#[derive(Clone, Copy)]
struct Simulate {
    ensemble: bool,
    classical: bool,
}

fn comparison_rows(cmd: &Command, cells: &[(u32, u64, u64)], sim: Simulate) -> Result<Vec<ComparisonRow>, CliError> {
    let a = cmd.args();
    let mode = match &a.fixed_function {
        Some(f) => {
            if !matches!(cmd, Command::SimulateEnsemble(_)) {
                return Err(usage("--fixed-function applies to simulate-ensemble only"));
            }
            FunctionMode::Fixed(f.clone())
        }
        None => FunctionMode::FreshBalanced,
    };
    // Classical estimates depend on (n, M) only.
    let mut classical: BTreeMap<(u32, u64), McEstimate> = BTreeMap::new();
    let mut rows = Vec::with_capacity(cells.len());
    for &(n, m, r) in cells {
        let big_n = 1u64 << n;
        let mc_ensemble = if sim.ensemble {
            let params = EnsembleParams {
                n,
                molecules: m,
                resolution: r,
                trials: a.trials,
                seed: row_seed(a.seed, &[1, n as u64, m, r]),
            };
            Some(estimate_fail_prob_with(&params, &mode)?)
        } else {
            None
        };
        let mc_classical = if sim.classical {
            let est = match classical.get(&(n, m)) {
                Some(e) => *e,
                None => {
                    let e = estimate_classical_fail(n, m, a.trials, row_seed(a.seed, &[2, n as u64, m]))?;
                    classical.insert((n, m), e);
                    e
                }
            };
            Some(est)
        } else {
            None
        };
        rows.push(ComparisonRow {
            n,
            m,
            r,
            p_exact_ensemble: ensemble_fail_prob(m, r)?,
            p_exact_classical: if m <= big_n { Some(classical_fail_prob(n, m)?) } else { None },
            p_bound: separation_bound(m)?,
            mc_ensemble,
            mc_classical,
            separation: if m <= big_n / 2 { Some(verify_separation(n, m, r)?) } else { None },
        });
    }
    Ok(rows)
}

fn comparison_outcome(cmd: &Command, rows: &[ComparisonRow], verdict: Option<String>, passed: bool) -> Outcome {
    let body = render(
        cmd.args().format,
        &COMPARISON_COLUMNS,
        rows.iter().map(ComparisonRow::csv_record).collect(),
        rows.iter().map(ComparisonRow::json).collect(),
        cmd,
        verdict.as_deref(),
        passed,
    );
    Outcome {
        body,
        rows: rows.len(),
        passed,
        verdict,
    }
}

pub fn cmd_simulate(cmd: &Command) -> Result<Outcome, CliError> {
    check_trials(cmd.args())?;
    let (cells, sim) = match cmd {
        Command::SimulateEnsemble(_) => (
            sweep(cmd, half, unbounded)?,
            Simulate { ensemble: true, classical: false },
        ),
        Command::SimulateClassical(_) => (
            sweep(cmd, whole, whole)?,
            Simulate { ensemble: false, classical: true },
        ),
        _ => return Err(usage("not a simulate subcommand")),
    };
    let rows = comparison_rows(cmd, &cells, sim)?;
    Ok(comparison_outcome(cmd, &rows, None, true))
}

/// Summarizes the ordering `p_classical ≤ bound ≤ p_fail` over a sweep.
pub fn separation_verdict(rows: &[ComparisonRow]) -> (bool, String) {
    let mut violations = Vec::new();
    let mut all_equal_m = Vec::new();
    let mut left_equal_m = Vec::new();
    let mut right_equal_r = Vec::new();
    for row in rows {
        let Some(s) = &row.separation else { continue };
        if !s.holds() {
            violations.push(format!("n={},M={},R={}", row.n, row.m, row.r));
        }
        match (s.classical_vs_bound, s.bound_vs_fail) {
            (Relation::Equal, Relation::Equal) => all_equal_m.push(row.m),
            (Relation::Equal, _) => left_equal_m.push(row.m),
            (_, Relation::Equal) => right_equal_r.push(row.r),
            _ => {}
        }
    }
    if !violations.is_empty() {
        return (false, format!("separation violated at {}", violations.join(" ")));
    }
    let mut places = Vec::new();
    let mut describe = |mut values: Vec<u64>, name: &str, what: &str| {
        values.sort_unstable();
        values.dedup();
        if !values.is_empty() {
            let list: Vec<String> = values.iter().map(|v| format!("{name}={v}")).collect();
            places.push(format!("{} ({what})", list.join(",")));
        }
    };
    describe(all_equal_m, "M", "all three");
    describe(left_equal_m, "M", "left pair");
    describe(right_equal_r, "R", "right pair");
    let verdict = if places.is_empty() {
        "separation holds; all inequalities strict".to_string()
    } else {
        format!("separation holds; equalities only at {}", places.join(", "))
    };
    (true, verdict)
}

pub fn cmd_compare(cmd: &Command) -> Result<Outcome, CliError> {
    check_trials(cmd.args())?;
    let cells = sweep(cmd, half, half)?;
    let rows = comparison_rows(cmd, &cells, Simulate { ensemble: true, classical: true })?;
    let (passed, verdict) = separation_verdict(&rows);
    Ok(comparison_outcome(cmd, &rows, Some(verdict), passed))
}

pub fn cmd_quantum_check(cmd: &Command) -> Result<Outcome, CliError> {
    let a = cmd.args();
    let mut rows: Vec<CheckRow> = Vec::new();
    for n in n_values(cmd)? {
        rows.extend(quantum_check::check_width(n, a.seed)?);
    }
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{}@n={}", r.check, r.n))
        .collect();
    let passed = failed.is_empty();
    let verdict = if passed {
        format!("all {} quantum checks passed", rows.len())
    } else {
        format!("failed: {}", failed.join(" "))
    };
    let body = render(
        a.format,
        &CHECK_COLUMNS,
        rows.iter().map(CheckRow::csv_record).collect(),
        rows.iter().map(|r| serde_json::to_value(r).expect("serializable row")).collect(),
        cmd,
        Some(&verdict),
        passed,
    );
    Ok(Outcome {
        body,
        rows: rows.len(),
        passed,
        verdict: Some(verdict),
    })
}

pub fn cmd_enumerate(cmd: &Command) -> Result<Outcome, CliError> {
    let a = cmd.args();
    let guard = a.max_n_guard.unwrap_or(DEFAULT_ENUMERATION_GUARD);
    let mut records = Vec::new();
    let mut json_rows = Vec::new();
    for n in n_values(cmd)? {
        for (i, f) in enumerate_balanced(n, guard)?.enumerate() {
            let hex = f.to_hex_string();
            records.push(vec![n.to_string(), i.to_string(), hex.clone()]);
            json_rows.push(json!({ "n": n, "index": i, "table": hex }));
        }
    }
    let rows = records.len();
    let body = render(a.format, &ENUMERATE_COLUMNS, records, json_rows, cmd, None, true);
    Ok(Outcome {
        body,
        rows,
        passed: true,
        verdict: None,
    })
}

/// Runs a subcommand (on a dedicated pool when `--threads` is given).
pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    let work = || match cmd {
        Command::Exact(_) => cmd_exact(cmd),
        Command::SimulateEnsemble(_) | Command::SimulateClassical(_) => cmd_simulate(cmd),
        Command::Compare(_) => cmd_compare(cmd),
        Command::QuantumCheck(_) => cmd_quantum_check(cmd),
        Command::Enumerate(_) => cmd_enumerate(cmd),
    };
    match cmd.args().threads {
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| usage(format!("cannot start {t} threads: {e}")))?
            .install(work),
        None => work(),
    }
}

/// `<out>.meta.json`.
pub fn metadata_path(out: &Path) -> PathBuf {
    let mut p: OsString = out.as_os_str().to_owned();
    p.push(".meta.json");
    PathBuf::from(p)
}

/// Everything needed to reproduce a run.
pub fn metadata(cmd: &Command, outcome: &Outcome) -> serde_json::Value {
    json!({
        "tool": "djsim",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cmd.name(),
        "config": cmd.args(),
        "seed": cmd.args().seed,
        "rows": outcome.rows,
        "passed": outcome.passed,
        "verdict": outcome.verdict,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Executes and writes the report; returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let cmd = &cli.command;
    let outcome = match execute(cmd) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("djsim {}: {e}", cmd.name());
            return e.exit_code();
        }
    };
    eprintln!("djsim {}: {} rows", cmd.name(), outcome.rows);
    if let Some(v) = &outcome.verdict {
        eprintln!("djsim {}: {v}", cmd.name());
    }
    let written = match &cmd.args().out {
        Some(path) => {
            let meta = serde_json::to_string_pretty(&metadata(cmd, &outcome)).expect("serializable metadata") + "\n";
            write_file(path, &outcome.body).and_then(|_| write_file(&metadata_path(path), &meta))
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(outcome.body.as_bytes())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    };
    if let Err(e) = written {
        eprintln!("djsim {}: {e}", cmd.name());
        return e.exit_code();
    }
    if outcome.passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}
