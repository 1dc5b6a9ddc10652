//! Stochastic model of the expectation-value scheme.
//!
//! Each of `M` molecules starts in a basis state `|x⟩|0⟩` with `x` uniform,
//! so its target measurement is `+1` when `f(x) = 0` and `−1` otherwise.
//! The ensemble average `z̄` is then classified with resolution `R`: two
//! averages are told apart only when they differ in at least `R` individual
//! outcomes, i.e. by at least `2R/M`.

use std::fmt;

use num_rational::Rational64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{domain, Result};
use crate::estimate::McEstimate;
use crate::functions::{sample_balanced, FunctionClass, Oracle, TruthTableFunction, MAX_LAZY_QUBITS};
use crate::rng::{trial_rng, StreamDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnsembleParams {
    pub n: u32,
    pub molecules: u64,
    pub resolution: u64,
    pub trials: u64,
    pub seed: u64,
}

impl EnsembleParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_LAZY_QUBITS {
            return Err(domain(format!("n = {} outside 1..={MAX_LAZY_QUBITS}", self.n)));
        }
        if self.molecules == 0 || self.molecules > i64::MAX as u64 / 4 {
            return Err(domain(format!("M = {} out of range", self.molecules)));
        }
        check_resolution(self.molecules, self.resolution)?;
        if self.trials == 0 {
            return Err(domain("trials must be at least 1"));
        }
        Ok(())
    }
}

fn check_resolution(m: u64, r: u64) -> Result<()> {
    if r == 0 || r > m {
        return Err(domain(format!("R = {r} outside 1..={m}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionOutcome {
    Constant0,
    Constant1,
    Balanced,
    Indeterminate,
}

impl DecisionOutcome {
    pub fn is_constant(self) -> bool {
        matches!(self, DecisionOutcome::Constant0 | DecisionOutcome::Constant1)
    }
}

impl fmt::Display for DecisionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecisionOutcome::Constant0 => "constant0",
            DecisionOutcome::Constant1 => "constant1",
            DecisionOutcome::Balanced => "balanced",
            DecisionOutcome::Indeterminate => "indeterminate",
        })
    }
}

/// `z̄ = (1/M) Σ z_j`, kept exact as `sum / M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleAverage {
    sum: i64,
    molecules: u64,
}

impl EnsembleAverage {
    pub fn sum(&self) -> i64 {
        self.sum
    }

    pub fn molecules(&self) -> u64 {
        self.molecules
    }

    pub fn value(&self) -> Rational64 {
        Rational64::new(self.sum, self.molecules as i64)
    }
}

impl fmt::Display for EnsembleAverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.value();
        write!(f, "{}/{}", v.numer(), v.denom())
    }
}

impl Serialize for EnsembleAverage {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub true_class: FunctionClass,
    pub z_bar: EnsembleAverage,
    pub decision: DecisionOutcome,
    /// A balanced function was declared constant.
    pub failed: bool,
}

/// One molecule: uniform `x`, outcome `+1` if `f(x) = 0`, else `−1`.
pub fn sample_molecule_outcome<O: Oracle, R: Rng + ?Sized>(f: &mut O, rng: &mut R) -> Result<i8> {
    let x = rng.gen_range(0..f.input_count());
    Ok(if f.query(x, rng)? { -1 } else { 1 })
}

pub fn ensemble_average(outcomes: &[i8]) -> Result<EnsembleAverage> {
    if outcomes.is_empty() {
        return Err(domain("no outcomes to average"));
    }
    let mut sum = 0i64;
    for &z in outcomes {
        if z != 1 && z != -1 {
            return Err(domain(format!("outcome {z} is not ±1")));
        }
        sum += z as i64;
    }
    Ok(EnsembleAverage {
        sum,
        molecules: outcomes.len() as u64,
    })
}

/// Classifies `z̄` at resolution `r` out of `m` molecules.
///
/// `f = 0` is declared when fewer than `r` outcomes differ from the all-`+1`
/// record (`M(1 − z̄) < 2R`), `f = 1` symmetrically. When both hold (only
/// possible for `2R > M`) the sign of `z̄` decides, and `z̄ = 0` is
/// [`DecisionOutcome::Indeterminate`].
pub fn decide(z_bar: Rational64, m: u64, r: u64) -> Result<DecisionOutcome> {
    if m == 0 {
        return Err(domain("M must be at least 1"));
    }
    check_resolution(m, r)?;
    let m_i = m as i64;
    let scaled = z_bar * m_i;
    if !scaled.is_integer() || scaled.to_integer().abs() > m_i {
        return Err(domain(format!("z̄ = {z_bar} is not an average of {m} outcomes")));
    }
    let total = scaled.to_integer();
    let twice_r = 2 * r as i64;
    // M(1 − z̄) and M(1 + z̄) are twice the number of −1 and +1 outcomes.
    let looks_zero = m_i - total < twice_r;
    let looks_one = m_i + total < twice_r;
    Ok(match (looks_zero, looks_one) {
        (true, false) => DecisionOutcome::Constant0,
        (false, true) => DecisionOutcome::Constant1,
        (false, false) => DecisionOutcome::Balanced,
        (true, true) => match total.signum() {
            1 => DecisionOutcome::Constant0,
            -1 => DecisionOutcome::Constant1,
            _ => DecisionOutcome::Indeterminate,
        },
    })
}

/// Samples `M` molecules against `f`, averages and decides.
pub fn run_trial<O: Oracle, R: Rng + ?Sized>(
    params: &EnsembleParams,
    f: &mut O,
    rng: &mut R,
) -> Result<TrialRecord> {
    check_resolution(params.molecules, params.resolution)?;
    let true_class = f.class();
    let mut sum = 0i64;
    for _ in 0..params.molecules {
        sum += sample_molecule_outcome(f, rng)? as i64;
    }
    let z_bar = EnsembleAverage {
        sum,
        molecules: params.molecules,
    };
    let decision = decide(z_bar.value(), params.molecules, params.resolution)?;
    Ok(TrialRecord {
        true_class,
        z_bar,
        decision,
        failed: true_class == FunctionClass::Balanced && decision.is_constant(),
    })
}

/// Which function each trial runs against.
#[derive(Debug, Clone, Default)]
pub enum FunctionMode {
    /// A fresh uniformly random balanced function per trial.
    #[default]
    FreshBalanced,
    Fixed(TruthTableFunction),
}

fn trial_at(params: &EnsembleParams, mode: &FunctionMode, index: u64) -> Result<TrialRecord> {
    let mut rng = trial_rng(params.seed, StreamDomain::Ensemble, index);
    match mode {
        FunctionMode::FreshBalanced => {
            let mut f = sample_balanced(params.n)?;
            run_trial(params, &mut f, &mut rng)
        }
        FunctionMode::Fixed(table) => run_trial(params, &mut &*table, &mut rng),
    }
}

fn check_mode(params: &EnsembleParams, mode: &FunctionMode) -> Result<()> {
    params.validate()?;
    if let FunctionMode::Fixed(table) = mode {
        if table.n() != params.n {
            return Err(domain(format!(
                "fixed function has n = {}, params say {}",
                table.n(),
                params.n
            )));
        }
    }
    Ok(())
}

/// All trial records, in trial-index order.
pub fn trial_records(params: &EnsembleParams, mode: &FunctionMode) -> Result<Vec<TrialRecord>> {
    check_mode(params, mode)?;
    (0..params.trials)
        .into_par_iter()
        .map(|i| trial_at(params, mode, i))
        .collect()
}

pub fn estimate_fail_prob(params: &EnsembleParams) -> Result<McEstimate> {
    estimate_fail_prob_with(params, &FunctionMode::FreshBalanced)
}

pub fn estimate_fail_prob_with(params: &EnsembleParams, mode: &FunctionMode) -> Result<McEstimate> {
    check_mode(params, mode)?;
    let fails = (0..params.trials)
        .into_par_iter()
        .map(|i| trial_at(params, mode, i).map(|t| t.failed as u64))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(McEstimate::from_counts(fails, params.trials))
}
