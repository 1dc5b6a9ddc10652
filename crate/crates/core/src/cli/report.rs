//! Row types and their CSV / JSON renderings.

use serde::Serialize;

use crate::estimate::McEstimate;
use crate::exact::{ExactProb, Relation, SeparationReport};

/// Significant digits of every decimal rendering.
pub const DECIMAL_DIGITS: usize = 12;

pub const COMPARISON_COLUMNS: [&str; 13] = [
    "n",
    "M",
    "R",
    "p_exact_ensemble",
    "p_exact_classical",
    "p_bound",
    "p_mc_ensemble",
    "mc_stderr_e",
    "p_mc_classical",
    "mc_stderr_c",
    "z_e",
    "z_c",
    "flags",
];

pub const EXACT_COLUMNS: [&str; 10] = [
    "n",
    "M",
    "R",
    "failure_fraction",
    "p_exact_ensemble",
    "p_exact_classical",
    "p_bound",
    "p_exact_ensemble_approx",
    "p_exact_classical_approx",
    "flags",
];

pub const CHECK_COLUMNS: [&str; 6] = ["check", "n", "cases", "failures", "max_deviation", "status"];

pub const ENUMERATE_COLUMNS: [&str; 3] = ["n", "index", "table"];

/// A rational with its lossy decimal rendering, for JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct RationalCell {
    pub exact: ExactProb,
    pub approx: String,
    pub lossy: bool,
}

impl From<&ExactProb> for RationalCell {
    fn from(p: &ExactProb) -> Self {
        Self {
            exact: p.clone(),
            approx: p.to_decimal(DECIMAL_DIGITS),
            lossy: true,
        }
    }
}

pub fn fmt_float(x: f64) -> String {
    format!("{:.*e}", DECIMAL_DIGITS - 1, x)
}

fn relation_name(r: Relation) -> &'static str {
    match r {
        Relation::Strict => "strict",
        Relation::Equal => "equal",
        Relation::Violated => "violated",
    }
}

/// Flag tokens shared by exact and comparison rows.
fn flags_for(p_fail: &ExactProb, separation: Option<&SeparationReport>) -> Vec<String> {
    let mut flags = Vec::new();
    if let Some(s) = separation {
        flags.push(format!("cb={}", relation_name(s.classical_vs_bound)));
        flags.push(format!("bf={}", relation_name(s.bound_vs_fail)));
    }
    if p_fail.is_out_of_range() {
        flags.push("out_of_range".to_string());
    }
    flags
}

#[derive(Debug, Clone)]
pub struct ExactRow {
    pub n: u32,
    pub m: u64,
    pub r: u64,
    pub failure_fraction: Option<ExactProb>,
    pub p_ensemble: ExactProb,
    pub p_classical: ExactProb,
    pub bound: ExactProb,
    pub separation: Option<SeparationReport>,
}

impl ExactRow {
    pub fn flags(&self) -> Vec<String> {
        flags_for(&self.p_ensemble, self.separation.as_ref())
    }

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.m.to_string(),
            self.r.to_string(),
            self.failure_fraction.as_ref().map(|p| p.to_string()).unwrap_or_default(),
            self.p_ensemble.to_string(),
            self.p_classical.to_string(),
            self.bound.to_string(),
            self.p_ensemble.to_decimal(DECIMAL_DIGITS),
            self.p_classical.to_decimal(DECIMAL_DIGITS),
            self.flags().join(";"),
        ]
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "M": self.m,
            "R": self.r,
            "failure_fraction": self.failure_fraction.as_ref().map(RationalCell::from),
            "p_exact_ensemble": RationalCell::from(&self.p_ensemble),
            "p_exact_classical": RationalCell::from(&self.p_classical),
            "p_bound": RationalCell::from(&self.bound),
            "flags": self.flags(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub n: u32,
    pub m: u64,
    pub r: u64,
    pub p_exact_ensemble: ExactProb,
    /// Absent when `M > N`.
    pub p_exact_classical: Option<ExactProb>,
    pub p_bound: ExactProb,
    pub mc_ensemble: Option<McEstimate>,
    pub mc_classical: Option<McEstimate>,
    /// Present when `M <= N/2`.
    pub separation: Option<SeparationReport>,
}

impl ComparisonRow {
    /// Undefined when the formula exceeds 1.
    pub fn z_ensemble(&self) -> Option<f64> {
        if self.p_exact_ensemble.is_out_of_range() {
            return None;
        }
        Some(self.mc_ensemble?.z_score(self.p_exact_ensemble.to_f64()))
    }

    pub fn z_classical(&self) -> Option<f64> {
        Some(self.mc_classical?.z_score(self.p_exact_classical.as_ref()?.to_f64()))
    }

    pub fn flags(&self) -> Vec<String> {
        flags_for(&self.p_exact_ensemble, self.separation.as_ref())
    }

    pub fn csv_record(&self) -> Vec<String> {
        let f = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
        vec![
            self.n.to_string(),
            self.m.to_string(),
            self.r.to_string(),
            self.p_exact_ensemble.to_string(),
            self.p_exact_classical.as_ref().map(|p| p.to_string()).unwrap_or_default(),
            self.p_bound.to_string(),
            f(self.mc_ensemble.map(|e| e.estimate)),
            f(self.mc_ensemble.map(|e| e.stderr)),
            f(self.mc_classical.map(|e| e.estimate)),
            f(self.mc_classical.map(|e| e.stderr)),
            f(self.z_ensemble()),
            f(self.z_classical()),
            self.flags().join(";"),
        ]
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "M": self.m,
            "R": self.r,
            "p_exact_ensemble": RationalCell::from(&self.p_exact_ensemble),
            "p_exact_classical": self.p_exact_classical.as_ref().map(RationalCell::from),
            "p_bound": RationalCell::from(&self.p_bound),
            "mc_ensemble": self.mc_ensemble,
            "mc_classical": self.mc_classical,
            "z_e": self.z_ensemble(),
            "z_c": self.z_classical(),
            "flags": self.flags(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: &'static str,
    pub n: u32,
    pub cases: u64,
    pub failures: u64,
    pub max_deviation: f64,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.check.to_string(),
            self.n.to_string(),
            self.cases.to_string(),
            self.failures.to_string(),
            fmt_float(self.max_deviation),
            if self.passed() { "pass" } else { "fail" }.to_string(),
        ]
    }
}

pub fn render_csv(columns: &[&str], records: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(columns).expect("in-memory write");
    for r in records {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
