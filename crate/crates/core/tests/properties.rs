mod common;

use common::{count_constant_prefix, exhaustive_classical_fail, exhaustive_protocol_fail, ratio};
use ensemble_dj::ensemble_sim::{decide, DecisionOutcome};
use ensemble_dj::exact::{
    binomial, classical_fail_prob, ensemble_fail_prob, failure_fraction, verify_separation, Relation,
};
use ensemble_dj::functions::{enumerate_balanced, sample_balanced, FunctionClass, Oracle, TruthTableFunction};
use ensemble_dj::quantum::{
    apply_oracle, build_input_density, hadamard_layer_projector, oracle_unitary, DensityMatrix, EQ_TOL,
};
use num_bigint::BigUint;
use num_rational::Rational64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn enumeration_length_is_central_binomial() {
    for n in 1..=4u32 {
        let big_n = 1u64 << n;
        let count = enumerate_balanced(n, 4).unwrap().count();
        assert_eq!(BigUint::from(count), binomial(big_n, (big_n / 2) as i64));
        assert!(enumerate_balanced(n, 4)
            .unwrap()
            .all(|f| f.classify() == FunctionClass::Balanced));
    }
}

#[test]
fn failure_fraction_matches_enumeration() {
    for n in 1..=4u32 {
        for m in 1..=(1u64 << (n - 1)) {
            let (hit, total) = count_constant_prefix(n, m as usize);
            let ff = failure_fraction(n, m).unwrap();
            assert_eq!(ff.as_rational(), &ratio(hit, total), "n={n} M={m}");
            assert_eq!(classical_fail_prob(n, m).unwrap(), ff);
        }
    }
}

#[test]
fn classical_formula_matches_exhaustive_sequences() {
    for m in 1..=3 {
        assert_eq!(
            classical_fail_prob(2, m as u64).unwrap().as_rational(),
            &exhaustive_classical_fail(2, m)
        );
    }
    assert_eq!(
        classical_fail_prob(3, 3).unwrap().as_rational(),
        &exhaustive_classical_fail(3, 3)
    );
}

#[test]
fn protocol_formula_matches_exhaustive_outcomes() {
    for m in 1..=12u32 {
        for r in 1..=m as u64 {
            let formula = ensemble_fail_prob(m as u64, r).unwrap();
            if formula.is_out_of_range() {
                continue;
            }
            assert_eq!(formula.as_rational(), &exhaustive_protocol_fail(m, r), "M={m} R={r}");
        }
    }
}

#[test]
fn separation_holds_up_to_n6() {
    for n in 1..=6u32 {
        for m in 1..=(1u64 << (n - 1)) {
            for r in 1..=m {
                let s = verify_separation(n, m, r).unwrap();
                assert!(s.holds());
                if m == 1 {
                    assert_eq!((s.classical_vs_bound, s.bound_vs_fail), (Relation::Equal, Relation::Equal));
                } else {
                    assert_eq!(s.classical_vs_bound, Relation::Strict);
                    assert_eq!(s.bound_vs_fail == Relation::Equal, r == 1);
                }
            }
        }
    }
}

#[test]
fn lazy_sampler_is_uniform_over_balanced_tables() {
    let tables: Vec<String> = enumerate_balanced(2, 4).unwrap().map(|t| t.to_bit_string()).collect();
    let samples = 60_000u32;
    let mut counts = vec![0u32; tables.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..samples {
        let t = sample_balanced(2).unwrap().complete(&mut rng).unwrap().to_bit_string();
        counts[tables.iter().position(|s| *s == t).unwrap()] += 1;
    }
    let p = 1.0 / 6.0;
    let sigma = (samples as f64 * p * (1.0 - p)).sqrt();
    for (t, c) in tables.iter().zip(&counts) {
        assert!((*c as f64 - samples as f64 * p).abs() < 3.0 * sigma, "{t}: {c}");
    }
}

#[test]
fn superposition_projector_has_coherences() {
    assert!(!ensemble_dj::quantum::is_diagonal(&hadamard_layer_projector(3).unwrap()));
}

proptest! {
    #[test]
    fn hex_round_trip(n in 1u32..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = TruthTableFunction::random_balanced(n, &mut rng).unwrap();
        let back: TruthTableFunction = f.to_hex_string().parse().unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn lazy_requery_is_stable(n in 1u32..=40, xs in prop::collection::vec(any::<u64>(), 1..20), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = sample_balanced(n).unwrap();
        let mask = (1u64 << n) - 1;
        let first: Vec<bool> = xs.iter().map(|x| f.query(x & mask, &mut rng).unwrap()).collect();
        let again: Vec<bool> = xs.iter().map(|x| f.query(x & mask, &mut rng).unwrap()).collect();
        prop_assert_eq!(first, again);
        prop_assert_eq!(
            f.remaining_zeros() + f.remaining_ones() + f.assigned_count() as u64,
            1u64 << n
        );
    }

    #[test]
    fn decide_monotone(m in 1u64..=30, minus in 0u64..=30, r in 1u64..30) {
        prop_assume!(minus <= m && r < m);
        let z = Rational64::new(m as i64 - 2 * minus as i64, m as i64);
        let lo = decide(z, m, r).unwrap();
        let hi = decide(z, m, r + 1).unwrap();
        if lo.is_constant() {
            prop_assert_eq!(lo, hi);
        }
        if hi == DecisionOutcome::Balanced {
            prop_assert_eq!(lo, DecisionOutcome::Balanced);
        }
    }

    #[test]
    fn ensemble_increasing_in_r(m in 2u64..=64, r in 1u64..64) {
        prop_assume!(r < m);
        prop_assert!(ensemble_fail_prob(m, r).unwrap() < ensemble_fail_prob(m, r + 1).unwrap());
    }

    #[test]
    fn oracle_conjugation_keeps_state_valid(n in 1u32..=4, index in any::<u64>()) {
        let len = 1u32 << n;
        let idx = if len < 64 { index & ((1u64 << len) - 1) } else { index };
        let f = TruthTableFunction::from_index(n, idx).unwrap();
        let u = oracle_unitary(&f).unwrap();
        prop_assert!(u.is_self_inverse());
        let out = apply_oracle(&build_input_density(n).unwrap(), &u).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < EQ_TOL);
        // Re-validating checks Hermiticity and PSD.
        prop_assert!(DensityMatrix::new(out.matrix().clone()).is_ok());
    }
}
