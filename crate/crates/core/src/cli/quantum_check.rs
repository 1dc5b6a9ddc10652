use rand::Rng;

use super::report::CheckRow;
use crate::error::Result;
use crate::functions::{FunctionClass, TruthTableFunction};
use crate::quantum::{
    apply_oracle, build_input_density, expected_output_density, is_diagonal, oracle_unitary,
    oracle_via_projectors, reduce_target, run_pure_state_dj, sigma_z_expectation, EQ_TOL,
};
use crate::rng::{trial_rng, StreamDomain};

/// Widths up to this are checked over every truth table.
pub const EXHAUSTIVE_MAX_N: u32 = 3;
/// Random balanced and random arbitrary tables drawn per width above that.
pub const SAMPLES_PER_KIND: usize = 16;

#[derive(Default)]
struct Tally {
    cases: u64,
    failures: u64,
    max_deviation: f64,
}

impl Tally {
    fn record(&mut self, ok: bool, deviation: f64) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
        if deviation.is_nan() || deviation > self.max_deviation {
            self.max_deviation = deviation;
        }
    }

    fn row(self, check: &'static str, n: u32) -> CheckRow {
        CheckRow {
            check,
            n,
            cases: self.cases,
            failures: self.failures,
            max_deviation: self.max_deviation,
        }
    }
}

fn cases_for(n: u32, seed: u64) -> Result<Vec<TruthTableFunction>> {
    if n <= EXHAUSTIVE_MAX_N {
        return Ok(TruthTableFunction::all(n)?.collect());
    }
    let mut rng = trial_rng(seed, StreamDomain::QuantumSampling, n as u64);
    let mut cases = vec![
        TruthTableFunction::constant(n, false)?,
        TruthTableFunction::constant(n, true)?,
    ];
    for _ in 0..SAMPLES_PER_KIND {
        cases.push(TruthTableFunction::random_balanced(n, &mut rng)?);
    }
    for _ in 0..SAMPLES_PER_KIND {
        let len = 1usize << n;
        let bits: Vec<bool> = (0..len).map(|_| rng.gen()).collect();
        cases.push(TruthTableFunction::new(n, bits)?);
    }
    Ok(cases)
}

/// Runs every quantum identity at width `n`; one row per identity.
pub fn check_width(n: u32, seed: u64) -> Result<Vec<CheckRow>> {
    let rho_in = build_input_density(n)?;
    let mut input = Tally::default();
    let diag_ok = (0..rho_in.dim()).all(|i| {
        let want = if i % 2 == 0 { 1.0 / (1u64 << n) as f64 } else { 0.0 };
        (rho_in.entry(i, i).re - want).abs() < EQ_TOL
    });
    let trace_dev = (rho_in.trace().re - 1.0).abs();
    input.record(diag_ok && is_diagonal(&rho_in) && trace_dev < EQ_TOL, trace_dev);

    let mut projector = Tally::default();
    let mut self_inverse = Tally::default();
    let mut closed_form = Tally::default();
    let mut diagonal = Tally::default();
    let mut signature = Tally::default();
    let mut pure = Tally::default();

    for f in cases_for(n, seed)? {
        let u = oracle_unitary(&f)?;
        projector.record(oracle_via_projectors(&f)? == u, 0.0);
        self_inverse.record(u.is_self_inverse(), 0.0);

        let out = apply_oracle(&rho_in, &u)?;
        let dev = out.max_abs_diff(&expected_output_density(&f)?);
        closed_form.record(dev < EQ_TOL, dev);
        diagonal.record(is_diagonal(&out), 0.0);

        let expected = match f.classify() {
            FunctionClass::Constant0 => 1.0,
            FunctionClass::Constant1 => -1.0,
            FunctionClass::Balanced => 0.0,
            FunctionClass::Neither => continue,
        };
        let z = sigma_z_expectation(&reduce_target(&out)?)?;
        let dev = (z - expected).abs();
        signature.record(dev < EQ_TOL, dev);

        let run = run_pure_state_dj(&f)?;
        let want_zero = if f.classify().is_constant() { 1.0 } else { 0.0 };
        let dev = (run.zero_probability - want_zero).abs();
        pure.record(
            run.class == f.classify() && run.oracle_applications == 1 && dev < EQ_TOL,
            dev,
        );
    }

    Ok(vec![
        input.row("input_density", n),
        projector.row("oracle_projector_form", n),
        self_inverse.row("oracle_self_inverse", n),
        closed_form.row("output_closed_form", n),
        diagonal.row("output_diagonal", n),
        signature.row("sigma_z_signature", n),
        pure.row("pure_state_single_query", n),
    ])
}
