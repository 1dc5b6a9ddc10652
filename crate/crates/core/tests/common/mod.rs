#![allow(dead_code)]

use ensemble_dj::ensemble_sim::{decide, DecisionOutcome};
use ensemble_dj::functions::{enumerate_balanced, TruthTableFunction};
use num_bigint::BigUint;
use num_rational::{BigRational, Rational64};

pub fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigUint::from(num).into(), BigUint::from(den).into())
}

/// Balanced tables on `n` bits that are constant on inputs `0..m`, and the total.
pub fn count_constant_prefix(n: u32, m: usize) -> (u64, u64) {
    let mut hit = 0;
    let mut total = 0;
    for f in enumerate_balanced(n, 4).unwrap() {
        total += 1;
        let bits: Vec<bool> = f.iter().take(m).collect();
        if bits.iter().all(|&b| b == bits[0]) {
            hit += 1;
        }
    }
    (hit, total)
}

/// Exact probability that `decide` calls a balanced function constant,
/// enumerating all `2^m` equally likely outcome strings.
pub fn exhaustive_protocol_fail(m: u32, r: u64) -> BigRational {
    let mut fails = 0u64;
    for word in 0u64..(1u64 << m) {
        let minus = word.count_ones() as i64;
        let z = Rational64::new(m as i64 - 2 * minus, m as i64);
        if matches!(
            decide(z, m as u64, r).unwrap(),
            DecisionOutcome::Constant0 | DecisionOutcome::Constant1
        ) {
            fails += 1;
        }
    }
    ratio(fails, 1u64 << m)
}

/// Averages classical failure over all balanced `f` on `n` bits and every
/// ordered sequence of `m` distinct inputs.
pub fn exhaustive_classical_fail(n: u32, m: usize) -> BigRational {
    let len = 1usize << n;
    let tables: Vec<TruthTableFunction> = enumerate_balanced(n, 4).unwrap().collect();
    let mut seqs: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..m {
        seqs = seqs
            .into_iter()
            .flat_map(|s| {
                (0..len)
                    .filter(|x| !s.contains(x))
                    .map(|x| {
                        let mut t = s.clone();
                        t.push(x);
                        t
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    let mut fails = 0u64;
    for f in &tables {
        for s in &seqs {
            let first = f.get(s[0] as u64).unwrap();
            if s.iter().all(|&x| f.get(x as u64).unwrap() == first) {
                fails += 1;
            }
        }
    }
    ratio(fails, (tables.len() * seqs.len()) as u64)
}
