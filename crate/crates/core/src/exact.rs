//! Exact combinatorics for the three failure probabilities and the ordering
//! between them.
//!
//! Every value is an arbitrary-precision rational; floating point only shows
//! up in [`ExactProb::to_f64`] and [`ExactProb::to_decimal`].

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{domain, Error, Result};

pub type BigCount = BigUint;

/// Largest `n` accepted by the formulas that need `C(2^n, 2^(n-1))`.
pub const MAX_EXACT_QUBITS: u32 = 16;

/// A non-negative exact rational in lowest terms.
///
/// Values produced by the formulas here lie in `[0, 1]`, except
/// [`ensemble_fail_prob`] which is returned verbatim when it exceeds 1;
/// [`ExactProb::is_out_of_range`] reports that case.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactProb(BigRational);

impl ExactProb {
    pub fn new(numerator: impl Into<BigUint>, denominator: impl Into<BigUint>) -> Result<Self> {
        let den: BigUint = denominator.into();
        if den.is_zero() {
            return Err(domain("zero denominator"));
        }
        let value = BigRational::new(BigInt::from(numerator.into()), BigInt::from(den));
        if value > BigRational::one() {
            return Err(domain(format!("{value} is not a probability")));
        }
        Ok(Self(value))
    }

    fn from_formula(numerator: BigUint, denominator: BigUint) -> Self {
        Self(BigRational::new(numerator.into(), denominator.into()))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    /// `2^-exp`.
    pub fn half_pow(exp: u32) -> Self {
        Self::from_formula(BigUint::one(), BigUint::one() << exp)
    }

    pub fn numerator(&self) -> BigUint {
        self.0.numer().magnitude().clone()
    }

    pub fn denominator(&self) -> BigUint {
        self.0.denom().magnitude().clone()
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn is_out_of_range(&self) -> bool {
        self.0 > BigRational::one()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Lossy.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Scientific notation with `sig` significant digits, rounded half-up,
    /// computed exactly (no underflow for tiny values).
    pub fn to_decimal(&self, sig: usize) -> String {
        decimal_scientific(&self.0, sig)
    }

    /// `2·self`, used for the two-sided counts.
    fn doubled(self) -> Self {
        Self(self.0 * BigRational::from_integer(BigInt::from(2)))
    }
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactProb({self})")
    }
}

impl Serialize for ExactProb {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl std::str::FromStr for ExactProb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, q) = s.split_once('/').unwrap_or((s, "1"));
        let p: BigUint = p.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let q: BigUint = q.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Self::from_formula(p, q))
    }
}

fn decimal_scientific(value: &BigRational, sig: usize) -> String {
    let sig = sig.max(1);
    if value.is_zero() {
        return format!("{}e0", pad_mantissa("0".repeat(sig)));
    }
    let num = value.numer().magnitude().clone();
    let den = value.denom().magnitude().clone();
    let ten = BigUint::from(10u32);
    // Find exp with 10^(sig-1) <= value * 10^(sig-1-exp) < 10^sig.
    let mut exp: i64 = num.to_string().len() as i64 - den.to_string().len() as i64;
    let scaled = |exp: i64| -> (BigUint, BigUint) {
        let shift = sig as i64 - 1 - exp;
        if shift >= 0 {
            (&num * ten.pow(shift as u32), den.clone())
        } else {
            (num.clone(), &den * ten.pow((-shift) as u32))
        }
    };
    let lower = ten.pow(sig as u32 - 1);
    loop {
        let (a, b) = scaled(exp);
        let q = &a / &b;
        if q < lower {
            exp -= 1;
        } else if q >= &lower * &ten {
            exp += 1;
        } else {
            break;
        }
    }
    let (a, b) = scaled(exp);
    let (mut q, r) = a.div_rem(&b);
    if r * 2u32 >= b {
        q += 1u32;
        if q == &lower * &ten {
            q = lower;
            exp += 1;
        }
    }
    format!("{}e{exp}", pad_mantissa(q.to_string()))
}

fn pad_mantissa(digits: String) -> String {
    let (head, tail) = digits.split_at(1);
    if tail.is_empty() {
        head.to_string()
    } else {
        format!("{head}.{tail}")
    }
}

/// `C(a, b)`, zero when `b < 0` or `b > a`.
pub fn binomial(a: u64, b: i64) -> BigCount {
    if b < 0 || b as u64 > a {
        return BigUint::zero();
    }
    let k = (b as u64).min(a - b as u64);
    let mut acc = BigUint::one();
    for i in 1..=k {
        // acc holds C(a-k+i-1, i-1); the division is exact.
        acc *= a - k + i;
        acc /= i;
    }
    acc
}

fn input_size(n: u32, bound: u32) -> Result<u64> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    if n > bound {
        return Err(Error::ResourceLimit {
            what: "n (exact formula)",
            value: n as u64,
            bound: bound as u64,
        });
    }
    Ok(1u64 << n)
}

fn check_molecules_half(n_inputs: u64, m: u64) -> Result<()> {
    if m == 0 || m > n_inputs / 2 {
        return Err(domain(format!(
            "M = {m} outside 1..={} (N/2)",
            n_inputs / 2
        )));
    }
    Ok(())
}

/// Balanced functions that are constant on the first `m` inputs: `2·C(N−M, N/2−M)`.
pub fn count_misclassified_balanced(n: u32, m: u64) -> Result<BigCount> {
    let big_n = input_size(n, MAX_EXACT_QUBITS)?;
    check_molecules_half(big_n, m)?;
    Ok(binomial(big_n - m, (big_n / 2 - m) as i64) * 2u32)
}

/// Fraction of balanced functions misclassified when `m` distinct inputs are
/// seen: `2·C(N−M, N/2−M) / C(N, N/2)`.
pub fn failure_fraction(n: u32, m: u64) -> Result<ExactProb> {
    let count = count_misclassified_balanced(n, m)?;
    let big_n = 1u64 << n;
    Ok(ExactProb::from_formula(
        count,
        binomial(big_n, (big_n / 2) as i64),
    ))
}

/// Probability that the ensemble protocol declares a balanced function
/// constant: `2^-(M-1) · Σ_{k<R} C(M, k)`. May exceed 1 for large `r`.
pub fn ensemble_fail_prob(m: u64, r: u64) -> Result<ExactProb> {
    if m == 0 {
        return Err(domain("M must be at least 1"));
    }
    if r == 0 || r > m {
        return Err(domain(format!("R = {r} outside 1..={m}")));
    }
    let exp = u32::try_from(m - 1).map_err(|_| domain("M too large"))?;
    let sum: BigUint = (0..r).map(|k| binomial(m, k as i64)).sum();
    Ok(ExactProb::from_formula(sum, BigUint::one() << exp))
}

/// Failure probability of the classical random algorithm with `m` distinct
/// queries: `2·C(N/2, M) / C(N, M)`, zero once `M > N/2`.
pub fn classical_fail_prob(n: u32, m: u64) -> Result<ExactProb> {
    let big_n = input_size(n, 62)?;
    if m == 0 || m > big_n {
        return Err(domain(format!("M = {m} outside 1..={big_n}")));
    }
    if m > big_n / 2 {
        return Ok(ExactProb::zero());
    }
    Ok(ExactProb::from_formula(
        binomial(big_n / 2, m as i64),
        binomial(big_n, m as i64),
    )
    .doubled())
}

/// `2·(1/2)^M`.
pub fn separation_bound(m: u64) -> Result<ExactProb> {
    if m == 0 {
        return Err(domain("M must be at least 1"));
    }
    let exp = u32::try_from(m - 1).map_err(|_| domain("M too large"))?;
    Ok(ExactProb::half_pow(exp))
}

/// How the left value of a pair relates to the right one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Strict,
    Equal,
    Violated,
}

impl Relation {
    fn of(left: &ExactProb, right: &ExactProb) -> Self {
        match left.cmp(right) {
            Ordering::Less => Relation::Strict,
            Ordering::Equal => Relation::Equal,
            Ordering::Greater => Relation::Violated,
        }
    }
}

/// Exact comparison of `p_classical`, `2·(1/2)^M` and `p_fail`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationReport {
    pub n: u32,
    pub m: u64,
    pub r: u64,
    pub p_classical: ExactProb,
    pub bound: ExactProb,
    pub p_fail: ExactProb,
    /// `p_classical` vs `bound`.
    pub classical_vs_bound: Relation,
    /// `bound` vs `p_fail`.
    pub bound_vs_fail: Relation,
}

impl SeparationReport {
    /// `p_classical ≤ bound ≤ p_fail`.
    pub fn holds(&self) -> bool {
        self.classical_vs_bound != Relation::Violated && self.bound_vs_fail != Relation::Violated
    }
}

pub fn verify_separation(n: u32, m: u64, r: u64) -> Result<SeparationReport> {
    let big_n = input_size(n, 62)?;
    check_molecules_half(big_n, m)?;
    let p_classical = classical_fail_prob(n, m)?;
    let bound = separation_bound(m)?;
    let p_fail = ensemble_fail_prob(m, r)?;
    Ok(SeparationReport {
        n,
        m,
        r,
        classical_vs_bound: Relation::of(&p_classical, &bound),
        bound_vs_fail: Relation::of(&bound, &p_fail),
        p_classical,
        bound,
        p_fail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> ExactProb {
        s.parse().unwrap()
    }

    /// Pascal's triangle, additions only.
    fn pascal(a: usize, b: usize) -> BigUint {
        let mut row = vec![BigUint::one()];
        for _ in 0..a {
            let mut next = vec![BigUint::one(); row.len() + 1];
            for i in 1..row.len() {
                next[i] = &row[i - 1] + &row[i];
            }
            row = next;
        }
        row.get(b).cloned().unwrap_or_default()
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(2, 3), BigUint::zero());
        assert_eq!(binomial(5, -1), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(pascal(64, 32), BigUint::from(1832624140942590534u64));
        assert_eq!(binomial(64, 32), BigUint::from(1832624140942590534u64));
    }

    #[test]
    fn binomial_matches_pascal() {
        for a in 0..=40usize {
            for b in 0..=a + 1 {
                assert_eq!(binomial(a as u64, b as i64), pascal(a, b), "C({a},{b})");
            }
        }
    }

    #[test]
    fn misclassified_counts() {
        assert_eq!(count_misclassified_balanced(2, 1).unwrap(), BigUint::from(6u32));
        assert_eq!(count_misclassified_balanced(2, 2).unwrap(), BigUint::from(2u32));
        assert_eq!(count_misclassified_balanced(3, 4).unwrap(), BigUint::from(2u32));
        assert!(count_misclassified_balanced(2, 3).is_err());
        assert!(count_misclassified_balanced(2, 0).is_err());
    }

    #[test]
    fn failure_fraction_examples() {
        assert_eq!(failure_fraction(2, 1).unwrap(), p("1"));
        assert_eq!(failure_fraction(2, 2).unwrap(), p("1/3"));
        assert_eq!(failure_fraction(3, 4).unwrap(), p("1/35"));
        assert!(failure_fraction(3, 5).is_err());
        assert!(matches!(
            failure_fraction(17, 1),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn ensemble_examples() {
        assert_eq!(ensemble_fail_prob(5, 1).unwrap(), p("1/16"));
        assert_eq!(ensemble_fail_prob(1, 1).unwrap(), p("1"));
        assert_eq!(ensemble_fail_prob(4, 2).unwrap(), p("5/8"));
        assert_eq!(ensemble_fail_prob(2, 2).unwrap(), p("3/2"));
        assert!(ensemble_fail_prob(2, 2).unwrap().is_out_of_range());
        assert!(ensemble_fail_prob(3, 0).is_err());
        assert!(ensemble_fail_prob(3, 4).is_err());
    }

    #[test]
    fn classical_examples() {
        assert_eq!(classical_fail_prob(2, 2).unwrap(), p("1/3"));
        assert_eq!(classical_fail_prob(2, 1).unwrap(), p("1"));
        assert_eq!(classical_fail_prob(2, 3).unwrap(), p("0"));
        assert_eq!(classical_fail_prob(2, 4).unwrap(), p("0"));
        assert_eq!(classical_fail_prob(3, 3).unwrap(), p("1/7"));
        assert!(classical_fail_prob(2, 5).is_err());
        // Large N with a small budget stays cheap.
        assert!(classical_fail_prob(40, 3).unwrap() < p("1/4"));
    }

    #[test]
    fn separation_examples() {
        let r = verify_separation(3, 3, 1).unwrap();
        assert_eq!(r.p_classical, p("1/7"));
        assert_eq!(r.bound, p("1/4"));
        assert_eq!(r.p_fail, p("1/4"));
        assert_eq!((r.classical_vs_bound, r.bound_vs_fail), (Relation::Strict, Relation::Equal));

        let r = verify_separation(3, 1, 1).unwrap();
        assert_eq!((&r.p_classical, &r.bound, &r.p_fail), (&p("1"), &p("1"), &p("1")));
        assert_eq!((r.classical_vs_bound, r.bound_vs_fail), (Relation::Equal, Relation::Equal));

        let r = verify_separation(3, 4, 2).unwrap();
        assert_eq!(r.p_fail, p("5/8"));
        assert_eq!(r.bound, p("1/8"));
        assert_eq!(r.p_classical, p("1/35"));
        assert!(r.holds());
        assert_eq!((r.classical_vs_bound, r.bound_vs_fail), (Relation::Strict, Relation::Strict));
    }

    #[test]
    fn ensemble_strictly_increasing_in_r() {
        for m in 2..=20u64 {
            for r in 1..m {
                assert!(ensemble_fail_prob(m, r).unwrap() < ensemble_fail_prob(m, r + 1).unwrap());
            }
        }
    }

    #[test]
    fn rendering() {
        assert_eq!(p("6/12").to_string(), "1/2");
        assert_eq!(p("1/512").to_decimal(12), "1.95312500000e-3");
        assert_eq!(p("1/3").to_decimal(12), "3.33333333333e-1");
        assert_eq!(p("2/3").to_decimal(12), "6.66666666667e-1");
        assert_eq!(p("1").to_decimal(12), "1.00000000000e0");
        assert_eq!(p("0").to_decimal(12), "0.00000000000e0");
        assert_eq!(p("3/2").to_decimal(3), "1.50e0");
        assert_eq!(p("999999/1000000").to_decimal(3), "1.00e0");
        assert_eq!(ExactProb::half_pow(2000).to_decimal(4), "8.710e-603");
        assert_eq!(ExactProb::half_pow(2000).to_f64(), 0.0);
    }

    #[test]
    fn new_rejects_above_one() {
        assert!(ExactProb::new(3u32, 2u32).is_err());
        assert!(ExactProb::new(1u32, 0u32).is_err());
        assert_eq!(ExactProb::new(2u32, 4u32).unwrap(), p("1/2"));
    }
}
