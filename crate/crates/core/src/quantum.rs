//! Dense density-matrix checks for the ensemble scheme at small `n`.
//!
//! Basis convention, used everywhere: the composite index of `|x⟩|y⟩` is
//! `2·x + y`, so the target qubit is the least-significant bit and the
//! argument register occupies bits `1..=n`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{domain, Error, Result};
use crate::functions::{FunctionClass, TruthTableFunction};

/// Largest argument-register width (dimension `2^(n+1) <= 128`).
pub const MAX_QUANTUM_QUBITS: u32 = 6;
/// Entrywise equality tolerance.
pub const EQ_TOL: f64 = 1e-12;
/// Lowest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_width(n: u32) -> Result<()> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    if n > MAX_QUANTUM_QUBITS {
        return Err(Error::ResourceLimit {
            what: "n (density matrix)",
            value: n as u64,
            bound: MAX_QUANTUM_QUBITS as u64,
        });
    }
    Ok(())
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(domain("density matrix must be square and non-empty"));
        }
        let dim = matrix.nrows();
        for i in 0..dim {
            for j in i..dim {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() >= EQ_TOL {
                    return Err(domain(format!("not Hermitian at ({i}, {j})")));
                }
            }
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() >= EQ_TOL {
            return Err(domain(format!("trace {trace} is not 1")));
        }
        let min_eig = matrix
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < PSD_TOL {
            return Err(domain(format!("negative eigenvalue {min_eig}")));
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(state: &PureState) -> Result<Self> {
        let v = &state.amplitudes;
        Self::new(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Debug export: rows of `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        complex_matrix_json(&self.matrix)
    }
}

fn complex_matrix_json(m: &DMatrix<Complex64>) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            Value::Array(
                (0..m.ncols())
                    .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

/// The oracle `|x⟩|y⟩ → |x⟩|y ⊕ f(x)⟩` as a 0/1 permutation matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleUnitary {
    matrix: DMatrix<u8>,
}

impl OracleUnitary {
    fn new(matrix: DMatrix<u8>) -> Result<Self> {
        let is_perm = matrix.is_square()
            && matrix.row_iter().all(|r| r.iter().all(|&v| v <= 1) && r.iter().filter(|&&v| v == 1).count() == 1)
            && matrix.column_iter().all(|c| c.iter().filter(|&&v| v == 1).count() == 1);
        if !is_perm {
            return Err(domain("oracle matrix is not a permutation"));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<u8> {
        &self.matrix
    }

    /// Exact integer check of `U·U = I`.
    pub fn is_self_inverse(&self) -> bool {
        let wide = self.matrix.map(u32::from);
        &wide * &wide == DMatrix::identity(self.dim(), self.dim())
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        self.matrix.map(|v| Complex64::new(v as f64, 0.0))
    }

    /// Index `j` is sent to the unique `i` with `U[i, j] = 1`.
    fn image(&self, j: usize) -> usize {
        self.matrix
            .column(j)
            .iter()
            .position(|&v| v == 1)
            .expect("permutation column")
    }

    pub fn to_json(&self) -> Value {
        complex_matrix_json(&self.to_complex())
    }
}

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() >= EQ_TOL {
            return Err(domain(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    /// The computational basis state with composite index `index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(domain(format!("basis index {index} >= dimension {dim}")));
        }
        let mut v = DVector::from_element(dim, ZERO);
        v[index] = ONE;
        Ok(Self { amplitudes: v })
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// Hadamard on the qubit stored at bit `bit` of the composite index.
    fn hadamard(&mut self, bit: u32) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mask = 1usize << bit;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let (a, b) = (self.amplitudes[i], self.amplitudes[i | mask]);
                self.amplitudes[i] = (a + b) * s;
                self.amplitudes[i | mask] = (a - b) * s;
            }
        }
    }

    fn apply(&mut self, u: &OracleUnitary) {
        let mut out = DVector::from_element(self.amplitudes.len(), ZERO);
        for (j, amp) in self.amplitudes.iter().enumerate() {
            out[u.image(j)] = *amp;
        }
        self.amplitudes = out;
    }
}

/// `2^-n · Σ_x |x⟩⟨x| ⊗ |0⟩⟨0|`.
pub fn build_input_density(n: u32) -> Result<DensityMatrix> {
    check_width(n)?;
    let dim = 1usize << (n + 1);
    let weight = Complex64::new(1.0 / (1u64 << n) as f64, 0.0);
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for x in 0..1usize << n {
        m[(2 * x, 2 * x)] = weight;
    }
    DensityMatrix::new(m)
}

/// Closed form of the output state: `2^-n · Σ_x |x⟩⟨x| ⊗ |f(x)⟩⟨f(x)|`.
pub fn expected_output_density(f: &TruthTableFunction) -> Result<DensityMatrix> {
    check_width(f.n())?;
    let dim = 1usize << (f.n() + 1);
    let weight = Complex64::new(1.0 / f.len() as f64, 0.0);
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for x in 0..f.len() {
        let i = 2 * x + f.bit(x) as usize;
        m[(i, i)] = weight;
    }
    DensityMatrix::new(m)
}

/// The oracle built directly from its action on basis states.
pub fn oracle_unitary(f: &TruthTableFunction) -> Result<OracleUnitary> {
    check_width(f.n())?;
    let dim = 1usize << (f.n() + 1);
    let mut m = DMatrix::from_element(dim, dim, 0u8);
    for x in 0..f.len() {
        for y in 0..2usize {
            let out = 2 * x + (y ^ f.bit(x) as usize);
            m[(out, 2 * x + y)] = 1;
        }
    }
    OracleUnitary::new(m)
}

/// Projectors `(P0, P1)` onto the inputs where `f` is 0 and 1.
pub fn argument_projectors(f: &TruthTableFunction) -> Result<(DMatrix<u8>, DMatrix<u8>)> {
    check_width(f.n())?;
    let len = f.len();
    let mut p0 = DMatrix::from_element(len, len, 0u8);
    let mut p1 = DMatrix::from_element(len, len, 0u8);
    for x in 0..len {
        if f.bit(x) {
            p1[(x, x)] = 1;
        } else {
            p0[(x, x)] = 1;
        }
    }
    Ok((p0, p1))
}

/// The oracle as `P0 ⊗ I + P1 ⊗ σx`.
pub fn oracle_via_projectors(f: &TruthTableFunction) -> Result<OracleUnitary> {
    let (p0, p1) = argument_projectors(f)?;
    let identity = DMatrix::<u8>::identity(2, 2);
    let sigma_x = DMatrix::from_row_slice(2, 2, &[0u8, 1, 1, 0]);
    OracleUnitary::new(p0.kronecker(&identity) + p1.kronecker(&sigma_x))
}

/// `U ρ U†`.
pub fn apply_oracle(rho: &DensityMatrix, u: &OracleUnitary) -> Result<DensityMatrix> {
    if rho.dim() != u.dim() {
        return Err(domain(format!(
            "dimension mismatch: state {} vs oracle {}",
            rho.dim(),
            u.dim()
        )));
    }
    let uc = u.to_complex();
    DensityMatrix::new(&uc * rho.matrix() * uc.adjoint())
}

/// Partial trace over the argument register, leaving the 2×2 target state.
pub fn reduce_target(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let dim = rho.dim();
    if dim < 2 || !dim.is_power_of_two() {
        return Err(domain(format!("dimension {dim} is not a qubit register")));
    }
    let mut out = DMatrix::from_element(2, 2, ZERO);
    for x in 0..dim / 2 {
        for a in 0..2 {
            for b in 0..2 {
                out[(a, b)] += rho.entry(2 * x + a, 2 * x + b);
            }
        }
    }
    DensityMatrix::new(out)
}

/// `Tr(σz ρ)` for a single-qubit state.
pub fn sigma_z_expectation(target: &DensityMatrix) -> Result<f64> {
    if target.dim() != 2 {
        return Err(domain(format!("expected a 2x2 state, got {}", target.dim())));
    }
    Ok((target.entry(0, 0) - target.entry(1, 1)).re)
}

/// True iff every off-diagonal entry is below [`EQ_TOL`] in magnitude.
pub fn is_diagonal(rho: &DensityMatrix) -> bool {
    let m = rho.matrix();
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)].norm() < EQ_TOL))
}

/// `|0…0⟩|1⟩` after the first Hadamard layer, as a projector.
pub fn hadamard_layer_projector(n: u32) -> Result<DensityMatrix> {
    check_width(n)?;
    let mut state = PureState::basis(1usize << (n + 1), 1)?;
    for bit in 0..=n {
        state.hadamard(bit);
    }
    DensityMatrix::from_pure(&state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureDjOutcome {
    pub class: FunctionClass,
    /// Probability that the argument register reads `0…0`.
    pub zero_probability: f64,
    pub oracle_applications: u32,
}

/// The standard single-query algorithm on `|0…0⟩|1⟩`.
///
/// Interference only separates constant from balanced; which constant is
/// settled by one classical evaluation of `f(0)`.
pub fn run_pure_state_dj(f: &TruthTableFunction) -> Result<PureDjOutcome> {
    let n = f.n();
    check_width(n)?;
    let class = f.classify();
    if class == FunctionClass::Neither {
        return Err(domain("function is neither constant nor balanced"));
    }
    let u = oracle_unitary(f)?;
    let mut state = PureState::basis(1usize << (n + 1), 1)?;
    for bit in 0..=n {
        state.hadamard(bit);
    }
    state.apply(&u);
    let oracle_applications = 1;
    for bit in 1..=n {
        state.hadamard(bit);
    }
    let amps = state.amplitudes();
    let zero_probability = amps[0].norm_sqr() + amps[1].norm_sqr();

    let class = if (zero_probability - 1.0).abs() < EQ_TOL {
        FunctionClass::constant(f.bit(0))
    } else if zero_probability < EQ_TOL {
        FunctionClass::Balanced
    } else {
        return Err(domain(format!(
            "ambiguous interference: P(0…0) = {zero_probability}"
        )));
    };
    Ok(PureDjOutcome {
        class,
        zero_probability,
        oracle_applications,
    })
}
