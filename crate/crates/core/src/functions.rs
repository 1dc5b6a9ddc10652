//! Boolean functions `f: {0,1}^n -> {0,1}` queried by every other module.
//!
//! Two representations are provided: [`TruthTableFunction`] stores the whole
//! table (packed, `n <= 20`), and [`LazyBalancedFunction`] fixes outputs only
//! when they are first queried, which is what makes Monte Carlo at large `n`
//! possible. Both implement [`Oracle`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use bitvec::prelude::*;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest argument width for an explicit truth table (2^20 bits = 128 KiB packed).
pub const MAX_TABLE_QUBITS: u32 = 20;
/// Largest argument width for a lazily sampled balanced function.
pub const MAX_LAZY_QUBITS: u32 = 62;
/// Default bound on `n` for [`enumerate_balanced`].
pub const DEFAULT_ENUMERATION_GUARD: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionClass {
    Constant0,
    Constant1,
    Balanced,
    Neither,
}

impl FunctionClass {
    pub fn is_constant(self) -> bool {
        matches!(self, FunctionClass::Constant0 | FunctionClass::Constant1)
    }

    pub fn constant(value: bool) -> Self {
        if value {
            FunctionClass::Constant1
        } else {
            FunctionClass::Constant0
        }
    }
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FunctionClass::Constant0 => "constant0",
            FunctionClass::Constant1 => "constant1",
            FunctionClass::Balanced => "balanced",
            FunctionClass::Neither => "neither",
        };
        f.write_str(s)
    }
}

/// Classical query access to a Boolean function.
///
/// `rng` is consumed only by representations that decide outputs on demand.
pub trait Oracle {
    fn n(&self) -> u32;

    fn query<R: Rng + ?Sized>(&mut self, x: u64, rng: &mut R) -> Result<bool>;

    /// The class of the (possibly not yet materialized) function.
    fn class(&self) -> FunctionClass;

    fn input_count(&self) -> u64 {
        1u64 << self.n()
    }
}

fn check_input(n: u32, x: u64) -> Result<()> {
    if x >> n != 0 {
        return Err(domain(format!("input {x} out of range for n = {n}")));
    }
    Ok(())
}

/// An explicit truth table, `table[x] = f(x)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTableFunction {
    n: u32,
    bits: BitVec<u8, Msb0>,
}

impl TruthTableFunction {
    pub fn new<I: IntoIterator<Item = bool>>(n: u32, table: I) -> Result<Self> {
        check_table_width(n)?;
        let bits: BitVec<u8, Msb0> = table.into_iter().collect();
        if bits.len() != 1usize << n {
            return Err(domain(format!(
                "table has {} entries, expected 2^{n} = {}",
                bits.len(),
                1usize << n
            )));
        }
        Ok(Self { n, bits })
    }

    pub fn constant(n: u32, value: bool) -> Result<Self> {
        check_table_width(n)?;
        Ok(Self {
            n,
            bits: BitVec::repeat(value, 1usize << n),
        })
    }

    /// Parses a plain bit string such as `"0110"`; its length must be a power of two ≥ 2.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let len = s.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Parse(format!(
                "bit string length {len} is not a power of two >= 2"
            )));
        }
        let n = len.trailing_zeros();
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, bits)
    }

    /// The `index`-th table of width `n` in lexicographic table order
    /// (`f(0)` is the most significant bit of `index`). Requires `2^n <= 64`.
    pub fn from_index(n: u32, index: u64) -> Result<Self> {
        if !(1..=6).contains(&n) {
            return Err(domain(format!("from_index needs 1 <= n <= 6, got {n}")));
        }
        let len = 1u32 << n;
        if len < 64 && index >> len != 0 {
            return Err(domain(format!("index {index} out of range for n = {n}")));
        }
        Self::new(n, (0..len).map(|x| (index >> (len - 1 - x)) & 1 == 1))
    }

    /// Every truth table of width `n`, in lexicographic order. `n <= 4`.
    pub fn all(n: u32) -> Result<impl Iterator<Item = TruthTableFunction>> {
        if !(1..=4).contains(&n) {
            return Err(Error::ResourceLimit {
                what: "n (all tables)",
                value: n as u64,
                bound: 4,
            });
        }
        let count = 1u64 << (1u32 << n);
        Ok((0..count).map(move |i| Self::from_index(n, i).expect("index in range")))
    }

    /// A uniformly random balanced table.
    pub fn random_balanced<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        check_table_width(n)?;
        sample_balanced(n)?.complete(rng)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, x: u64) -> Result<bool> {
        check_input(self.n, x)?;
        Ok(self.bits[x as usize])
    }

    /// Unchecked read used on hot paths where `x < 2^n` is already known.
    pub(crate) fn bit(&self, x: usize) -> bool {
        self.bits[x]
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().by_vals()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn classify(&self) -> FunctionClass {
        let ones = self.count_ones();
        let len = self.len();
        if ones == 0 {
            FunctionClass::Constant0
        } else if ones == len {
            FunctionClass::Constant1
        } else if 2 * ones == len {
            FunctionClass::Balanced
        } else {
            FunctionClass::Neither
        }
    }

    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    /// `n=<n>:<hex>` with `f(0)` as the most significant bit; a trailing
    /// partial nibble is zero-padded.
    pub fn to_hex_string(&self) -> String {
        let nibbles = self.len().div_ceil(4);
        let mut hex = hex::encode(self.bits.as_raw_slice());
        hex.truncate(nibbles);
        format!("n={}:{}", self.n, hex)
    }

    pub fn parse_hex(s: &str) -> Result<Self> {
        let (head, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("missing ':' in {s:?}")))?;
        let n: u32 = head
            .strip_prefix("n=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header {head:?}")))?;
        if n == 0 || n > MAX_TABLE_QUBITS {
            return Err(Error::Parse(format!("n = {n} outside 1..={MAX_TABLE_QUBITS}")));
        }
        let len = 1usize << n;
        let nibbles = len.div_ceil(4);
        if body.len() != nibbles {
            return Err(Error::Parse(format!(
                "expected {nibbles} hex digits for n = {n}, got {}",
                body.len()
            )));
        }
        let mut padded = body.to_ascii_lowercase();
        if padded.len() % 2 == 1 {
            padded.push('0');
        }
        let raw = hex::decode(&padded).map_err(|e| Error::Parse(e.to_string()))?;
        let mut bits = BitVec::<u8, Msb0>::from_vec(raw);
        if bits[len..].any() {
            return Err(Error::Parse("non-zero padding bits".into()));
        }
        bits.truncate(len);
        Ok(Self { n, bits })
    }
}

fn check_table_width(n: u32) -> Result<()> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    if n > MAX_TABLE_QUBITS {
        return Err(Error::ResourceLimit {
            what: "n (truth table)",
            value: n as u64,
            bound: MAX_TABLE_QUBITS as u64,
        });
    }
    Ok(())
}

impl fmt::Debug for TruthTableFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n <= 6 {
            write!(f, "TruthTableFunction(n={}, {})", self.n, self.to_bit_string())
        } else {
            write!(f, "TruthTableFunction(n={}, ..)", self.n)
        }
    }
}

impl fmt::Display for TruthTableFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex_string())
    }
}

impl FromStr for TruthTableFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_hex(s)
    }
}

impl Oracle for TruthTableFunction {
    fn n(&self) -> u32 {
        self.n
    }

    fn query<R: Rng + ?Sized>(&mut self, x: u64, _rng: &mut R) -> Result<bool> {
        self.get(x)
    }

    fn class(&self) -> FunctionClass {
        self.classify()
    }
}

impl Oracle for &TruthTableFunction {
    fn n(&self) -> u32 {
        self.n
    }

    fn query<R: Rng + ?Sized>(&mut self, x: u64, _rng: &mut R) -> Result<bool> {
        self.get(x)
    }

    fn class(&self) -> FunctionClass {
        self.classify()
    }
}

/// A balanced function whose outputs are fixed on first query.
///
/// Each fresh input receives a 1 with probability
/// `remaining_ones / (remaining_zeros + remaining_ones)`, so the completed
/// table is uniform over all balanced tables.
#[derive(Debug, Clone)]
pub struct LazyBalancedFunction {
    n: u32,
    remaining_zeros: u64,
    remaining_ones: u64,
    assigned: HashMap<u64, bool>,
}

impl LazyBalancedFunction {
    pub fn remaining_zeros(&self) -> u64 {
        self.remaining_zeros
    }

    pub fn remaining_ones(&self) -> u64 {
        self.remaining_ones
    }

    pub fn assigned(&self, x: u64) -> Option<bool> {
        self.assigned.get(&x).copied()
    }

    pub fn assigned_count(&self) -> usize {
        self.assigned.len()
    }

    /// Queries every input in order and returns the resulting table.
    pub fn complete<R: Rng + ?Sized>(mut self, rng: &mut R) -> Result<TruthTableFunction> {
        check_table_width(self.n)?;
        let len = 1u64 << self.n;
        let mut bits = Vec::with_capacity(len as usize);
        for x in 0..len {
            bits.push(self.query(x, rng)?);
        }
        TruthTableFunction::new(self.n, bits)
    }
}

impl Oracle for LazyBalancedFunction {
    fn n(&self) -> u32 {
        self.n
    }

    fn query<R: Rng + ?Sized>(&mut self, x: u64, rng: &mut R) -> Result<bool> {
        check_input(self.n, x)?;
        if let Some(&bit) = self.assigned.get(&x) {
            return Ok(bit);
        }
        let total = self.remaining_zeros + self.remaining_ones;
        debug_assert!(total > 0);
        let bit = rng.gen_range(0..total) < self.remaining_ones;
        if bit {
            self.remaining_ones -= 1;
        } else {
            self.remaining_zeros -= 1;
        }
        self.assigned.insert(x, bit);
        Ok(bit)
    }

    fn class(&self) -> FunctionClass {
        FunctionClass::Balanced
    }
}

/// A fresh lazily sampled balanced function on `n` argument bits.
pub fn sample_balanced(n: u32) -> Result<LazyBalancedFunction> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    if n > MAX_LAZY_QUBITS {
        return Err(Error::ResourceLimit {
            what: "n (lazy balanced function)",
            value: n as u64,
            bound: MAX_LAZY_QUBITS as u64,
        });
    }
    let half = 1u64 << (n - 1);
    Ok(LazyBalancedFunction {
        n,
        remaining_zeros: half,
        remaining_ones: half,
        assigned: HashMap::new(),
    })
}

/// Iterator over all balanced tables of a given width in lexicographic order.
#[derive(Debug, Clone)]
pub struct BalancedTables {
    n: u32,
    current: Option<Vec<bool>>,
}

impl Iterator for BalancedTables {
    type Item = TruthTableFunction;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.current.as_mut()?;
        let out = TruthTableFunction::new(self.n, current.iter().copied())
            .expect("width checked at construction");
        if !next_permutation(current) {
            self.current = None;
        }
        Some(out)
    }
}

/// Advances `bits` to the next lexicographic arrangement; false when it was the last.
fn next_permutation(bits: &mut [bool]) -> bool {
    let Some(i) = (1..bits.len()).rev().find(|&i| !bits[i - 1] && bits[i]) else {
        return false;
    };
    let pivot = i - 1;
    let j = (i..bits.len())
        .rev()
        .find(|&j| bits[j] && !bits[pivot])
        .expect("a larger element exists right of the pivot");
    bits.swap(pivot, j);
    bits[i..].reverse();
    true
}

/// Every balanced table on `n` bits, exactly once, in lexicographic table order.
///
/// `guard` bounds `n` (the stream has `C(2^n, 2^(n-1))` elements).
pub fn enumerate_balanced(n: u32, guard: u32) -> Result<BalancedTables> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    let bound = guard.min(MAX_TABLE_QUBITS);
    if n > bound {
        return Err(Error::ResourceLimit {
            what: "n (balanced enumeration)",
            value: n as u64,
            bound: bound as u64,
        });
    }
    let len = 1usize << n;
    let first = (0..len).map(|i| i >= len / 2).collect();
    Ok(BalancedTables {
        n,
        current: Some(first),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tt(s: &str) -> TruthTableFunction {
        TruthTableFunction::from_bit_str(s).unwrap()
    }

    #[test]
    fn evaluate_reads_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut f = tt("0110");
        assert!(f.query(2, &mut rng).unwrap());
        assert!(!f.query(3, &mut rng).unwrap());
        assert!(matches!(f.query(4, &mut rng), Err(Error::Domain(_))));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(tt("0000").classify(), FunctionClass::Constant0);
        assert_eq!(tt("1111").classify(), FunctionClass::Constant1);
        assert_eq!(tt("0011").classify(), FunctionClass::Balanced);
        assert_eq!(tt("0001").classify(), FunctionClass::Neither);
    }

    #[test]
    fn enumerate_small() {
        let tables: Vec<_> = enumerate_balanced(1, 4)
            .unwrap()
            .map(|t| t.to_bit_string())
            .collect();
        assert_eq!(tables, ["01", "10"]);

        let n2: Vec<_> = enumerate_balanced(2, 4)
            .unwrap()
            .map(|t| t.to_bit_string())
            .collect();
        assert_eq!(n2, ["0011", "0101", "0110", "1001", "1010", "1100"]);
    }

    #[test]
    fn enumerate_matches_brute_force_counts() {
        for n in 1..=3 {
            let brute = TruthTableFunction::all(n)
                .unwrap()
                .filter(|t| t.classify() == FunctionClass::Balanced)
                .count();
            let listed: Vec<_> = enumerate_balanced(n, 4).unwrap().collect();
            assert_eq!(listed.len(), brute);
            assert!(listed.windows(2).all(|w| w[0].to_bit_string() < w[1].to_bit_string()));
        }
        assert_eq!(enumerate_balanced(2, 4).unwrap().count(), 6);
        assert_eq!(enumerate_balanced(3, 4).unwrap().count(), 70);
    }

    #[test]
    fn enumerate_guard() {
        let err = enumerate_balanced(5, DEFAULT_ENUMERATION_GUARD).unwrap_err();
        assert_eq!(
            err,
            Error::ResourceLimit {
                what: "n (balanced enumeration)",
                value: 5,
                bound: 4
            }
        );
        assert!(err.to_string().contains('4'));
        assert!(enumerate_balanced(5, 5).is_ok());
    }

    #[test]
    fn sample_balanced_counters() {
        let f = sample_balanced(3).unwrap();
        assert_eq!(f.remaining_zeros(), 4);
        assert_eq!(f.remaining_ones(), 4);
        assert_eq!(f.assigned_count(), 0);
        assert!(sample_balanced(0).is_err());
        assert!(sample_balanced(63).is_err());
    }

    #[test]
    fn lazy_conditional_probability() {
        // Among the 3 balanced tables on 4 inputs with f(0)=0, one has f(1)=0.
        let tables: Vec<_> = enumerate_balanced(2, 4)
            .unwrap()
            .filter(|t| !t.bit(0))
            .collect();
        assert_eq!(tables.len(), 3);
        assert_eq!(tables.iter().filter(|t| !t.bit(1)).count(), 1);

        let mut f = sample_balanced(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // Force f(0)=0 by retrying.
        while f.query(0, &mut rng).unwrap() {
            f = sample_balanced(2).unwrap();
        }
        assert_eq!(f.remaining_zeros(), 1);
        assert_eq!(f.remaining_ones(), 2);
    }

    #[test]
    fn lazy_is_idempotent_and_completes_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            let mut f = sample_balanced(n).unwrap();
            let first = f.query(0, &mut rng).unwrap();
            for _ in 0..5 {
                assert_eq!(f.query(0, &mut rng).unwrap(), first);
            }
            let t = f.complete(&mut rng).unwrap();
            assert_eq!(t.classify(), FunctionClass::Balanced);
            assert_eq!(t.bit(0), first);
        }
    }

    #[test]
    fn hex_format() {
        assert_eq!(tt("0110").to_hex_string(), "n=2:6");
        assert_eq!(tt("01").to_hex_string(), "n=1:4");
        assert_eq!(tt("00001111").to_hex_string(), "n=3:0f");
        assert_eq!(
            TruthTableFunction::parse_hex("n=1:8").unwrap().to_bit_string(),
            "10"
        );
        assert!(TruthTableFunction::parse_hex("n=1:5").is_err());
        assert!(TruthTableFunction::parse_hex("n=2:66").is_err());
        assert!(TruthTableFunction::parse_hex("2:6").is_err());
    }

    #[test]
    fn from_index_is_lexicographic() {
        assert_eq!(TruthTableFunction::from_index(2, 6).unwrap().to_bit_string(), "0110");
        assert!(TruthTableFunction::from_index(2, 16).is_err());
        assert_eq!(TruthTableFunction::all(2).unwrap().count(), 16);
    }
}
