//! The classical random algorithm: query distinct random inputs until two
//! outputs differ or the budget runs out.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::estimate::McEstimate;
use crate::functions::{sample_balanced, FunctionClass, Oracle, MAX_LAZY_QUBITS};
use crate::rng::{trial_rng, StreamDomain};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassicalRunRecord {
    /// `(x, f(x))` in query order; all `x` distinct.
    pub queries: Vec<(u64, bool)>,
    /// One of `Constant0`, `Constant1`, `Balanced`.
    pub verdict: FunctionClass,
}

impl ClassicalRunRecord {
    pub fn queries_used(&self) -> usize {
        self.queries.len()
    }
}

/// Draws distinct values from `0..len` in uniformly random order.
///
/// A Fisher–Yates shuffle over a virtual array: only displaced slots are
/// stored, so each draw costs O(1) regardless of `len`.
#[derive(Debug)]
struct DistinctSampler {
    len: u64,
    drawn: u64,
    displaced: HashMap<u64, u64>,
}

impl DistinctSampler {
    fn new(len: u64) -> Self {
        Self {
            len,
            drawn: 0,
            displaced: HashMap::new(),
        }
    }

    fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<u64> {
        if self.drawn == self.len {
            return None;
        }
        let i = self.drawn;
        let j = rng.gen_range(i..self.len);
        let at = |d: &HashMap<u64, u64>, k: u64| d.get(&k).copied().unwrap_or(k);
        let picked = at(&self.displaced, j);
        let head = at(&self.displaced, i);
        self.displaced.insert(j, head);
        self.displaced.remove(&i);
        self.drawn += 1;
        Some(picked)
    }
}

/// Runs the algorithm with at most `budget` queries (never more than
/// `2^(n−1) + 1`). Each new output is compared with the first one.
pub fn run_classical_random<O: Oracle, R: Rng + ?Sized>(
    f: &mut O,
    budget: u64,
    rng: &mut R,
) -> Result<ClassicalRunRecord> {
    if budget == 0 {
        return Err(domain("query budget must be at least 1"));
    }
    if f.class() == FunctionClass::Neither {
        return Err(domain("function is neither constant nor balanced"));
    }
    let cap = budget.min(f.input_count() / 2 + 1);
    let mut inputs = DistinctSampler::new(f.input_count());
    let mut queries = Vec::new();
    let mut first = None;
    while (queries.len() as u64) < cap {
        let x = inputs.next(rng).expect("cap is below the input count");
        let y = f.query(x, rng)?;
        queries.push((x, y));
        match first {
            None => first = Some(y),
            Some(v) if v != y => {
                return Ok(ClassicalRunRecord {
                    queries,
                    verdict: FunctionClass::Balanced,
                })
            }
            Some(_) => {}
        }
    }
    let value = first.expect("at least one query");
    Ok(ClassicalRunRecord {
        queries,
        verdict: FunctionClass::constant(value),
    })
}

/// Fraction of trials (fresh balanced function each) declared constant.
pub fn estimate_classical_fail(n: u32, budget: u64, trials: u64, seed: u64) -> Result<McEstimate> {
    if n == 0 || n > MAX_LAZY_QUBITS {
        return Err(domain(format!("n = {n} outside 1..={MAX_LAZY_QUBITS}")));
    }
    if budget == 0 {
        return Err(domain("query budget must be at least 1"));
    }
    if trials == 0 {
        return Err(domain("trials must be at least 1"));
    }
    let fails = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, StreamDomain::Classical, i);
            let mut f = sample_balanced(n)?;
            let run = run_classical_random(&mut f, budget, &mut rng)?;
            Ok(run.verdict.is_constant() as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(McEstimate::from_counts(fails, trials))
}
