//! Density matrices, Bell-pair families, and state-level utilities.

use crate::linalg::{
    self, c, hermitian_eigen, is_hermitian, ket_from_bits, kron, max_abs_diff, outer,
    partial_trace_matrix, CMat, CVec,
};
use crate::{tolerance, Error, Result};
use num_complex::Complex64;

/// Absolute tolerance for Hermiticity of stored density matrices.
const HERMITICITY_TOL: f64 = 1e-12;
/// Most-negative eigenvalue tolerated before a state is rejected.
const EIGENVALUE_FLOOR: f64 = -1e-10;

/// A validated density operator on `n` qubits.
///
/// The matrix is Hermitian and positive semidefinite (both up to tight
/// numerical tolerances, enforced at construction). The trace is
/// either 1 (ordinary states, [`DensityMatrix::new`]) or any value in
/// `(0, 1]` for post-selected branches ([`DensityMatrix::new_subnormalized`]);
/// the trace doubles as the branch probability in the latter case.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat,
    n_qubits: usize,
}

impl DensityMatrix {
    /// Builds a unit-trace state, validating all invariants.
    pub fn new(matrix: CMat) -> Result<Self> {
        let dm = Self::new_subnormalized(matrix)?;
        let tr = dm.trace();
        if (tr - 1.0).abs() > tolerance() {
            return Err(Error::InvalidState(format!(
                "trace is {tr}, expected 1 within {}",
                tolerance()
            )));
        }
        Ok(dm)
    }

    /// Builds a state whose trace may be below 1 (a post-selected
    /// branch weighted by its probability).
    pub fn new_subnormalized(matrix: CMat) -> Result<Self> {
        let n_qubits = validate_square_power_of_two(&matrix)?;
        if !is_hermitian(&matrix, HERMITICITY_TOL) {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian within {HERMITICITY_TOL}"
            )));
        }
        // Symmetrize exactly so downstream arithmetic starts clean.
        let matrix = (&matrix + matrix.adjoint()).map(|z| z * 0.5);
        let (vals, _) = hermitian_eigen(&matrix);
        if let Some(min) = vals.iter().cloned().reduce(f64::min) {
            if min < EIGENVALUE_FLOOR {
                return Err(Error::InvalidState(format!(
                    "matrix has eigenvalue {min} below {EIGENVALUE_FLOOR}"
                )));
            }
        }
        let tr = matrix.trace().re;
        if tr > 1.0 + tolerance() {
            return Err(Error::InvalidState(format!(
                "trace is {tr}, above 1 within {}",
                tolerance()
            )));
        }
        if tr <= 0.0 {
            return Err(Error::InvalidState(format!(
                "trace is {tr}, expected positive"
            )));
        }
        Ok(Self { matrix, n_qubits })
    }

    /// Rank-one state `|ψ⟩⟨ψ|` from a (normalized) state vector.
    pub fn from_pure(ket: &CVec) -> Result<Self> {
        let norm = ket.norm();
        if (norm - 1.0).abs() > tolerance() {
            return Err(Error::InvalidState(format!(
                "state vector norm is {norm}, expected 1"
            )));
        }
        Self::new(outer(ket, ket))
    }

    /// Computational-basis state `|b_0 b_1 …⟩⟨b_0 b_1 …|`.
    pub fn basis(bits: &[u8]) -> Self {
        let ket = ket_from_bits(bits);
        Self {
            matrix: outer(&ket, &ket),
            n_qubits: bits.len(),
        }
    }

    /// All-zeros state on `n_qubits` qubits.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis(&vec![0u8; n_qubits])
    }

    /// Maximally mixed state `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            matrix: linalg::identity(dim).map(|z| z / dim as f64),
            n_qubits,
        }
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Hilbert-space dimension `2^n`.
    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    /// Number of qubits.
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Trace (1 for ordinary states, the branch probability for
    /// post-selected ones).
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Returns a unit-trace copy; fails if the trace is numerically
    /// zero (a branch that never occurs cannot be conditioned on).
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr < 1e-14 {
            return Err(Error::ZeroProbability(format!(
                "cannot normalize state with trace {tr}"
            )));
        }
        Ok(Self {
            matrix: self.matrix.map(|z| z / tr),
            n_qubits: self.n_qubits,
        })
    }

    /// Tensor product `self ⊗ other` (this state's qubits first).
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
            n_qubits: self.n_qubits + other.n_qubits,
        }
    }

    /// Traces out every qubit not in `keep`; the output orders its
    /// qubits as listed in `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_qubits];
        for &q in keep {
            if q >= self.n_qubits {
                return Err(Error::Dimension(format!(
                    "qubit {q} out of range for a {}-qubit state",
                    self.n_qubits
                )));
            }
            if seen[q] {
                return Err(Error::Dimension(format!("qubit {q} listed twice in keep")));
            }
            seen[q] = true;
        }
        Ok(Self {
            matrix: partial_trace_matrix(&self.matrix, self.n_qubits, keep),
            n_qubits: keep.len(),
        })
    }

    /// Internal constructor for matrices already known to be valid.
    pub(crate) fn from_valid(matrix: CMat, n_qubits: usize) -> Self {
        Self { matrix, n_qubits }
    }
}

fn validate_square_power_of_two(matrix: &CMat) -> Result<usize> {
    let dim = matrix.nrows();
    if matrix.ncols() != dim {
        return Err(Error::Dimension(format!(
            "matrix is {}×{}, expected square",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// The four maximally entangled two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellState {
    /// `(|00⟩ + |11⟩)/√2`
    PhiPlus,
    /// `(|00⟩ − |11⟩)/√2`
    PhiMinus,
    /// `(|01⟩ + |10⟩)/√2`
    PsiPlus,
    /// `(|01⟩ − |10⟩)/√2`
    PsiMinus,
}

impl BellState {
    /// All four states, in the order Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    /// State vector.
    pub fn vector(&self) -> CVec {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b, sign) = match self {
            BellState::PhiPlus => (0usize, 3usize, 1.0),
            BellState::PhiMinus => (0, 3, -1.0),
            BellState::PsiPlus => (1, 2, 1.0),
            BellState::PsiMinus => (1, 2, -1.0),
        };
        let mut v = CVec::zeros(4);
        v[a] = c(s, 0.0);
        v[b] = c(sign * s, 0.0);
        v
    }

    /// Rank-one density matrix.
    pub fn density(&self) -> DensityMatrix {
        let v = self.vector();
        DensityMatrix::from_valid(outer(&v, &v), 2)
    }
}

/// Families of imperfect entangled pairs used as raw material.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairFamily {
    /// Rotationally symmetric mixture: the complement of the target
    /// Bell weight is spread evenly over the other three Bell states.
    Werner,
    /// Phase-error-only mixture of Φ⁺ and Φ⁻.
    Binary,
}

impl PairFamily {
    /// Builds the family member with target-Bell-state weight `f`.
    pub fn state(&self, f: f64) -> Result<DensityMatrix> {
        match self {
            PairFamily::Werner => werner_state(f),
            PairFamily::Binary => binary_state(f),
        }
    }
}

/// Werner pair: `f · |Φ⁺⟩⟨Φ⁺| + (1−f)/3 · (Φ⁻ + Ψ⁺ + Ψ⁻ projectors)`.
pub fn werner_state(f: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidParameter(format!(
            "pair fidelity {f} outside [0, 1]"
        )));
    }
    let mut m = BellState::PhiPlus.density().matrix().map(|z| z * f);
    for b in [BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus] {
        m += b.density().matrix().map(|z| z * ((1.0 - f) / 3.0));
    }
    Ok(DensityMatrix::from_valid(m, 2))
}

/// Binary pair: `f · |Φ⁺⟩⟨Φ⁺| + (1−f) · |Φ⁻⟩⟨Φ⁻|`.
pub fn binary_state(f: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidParameter(format!(
            "pair fidelity {f} outside [0, 1]"
        )));
    }
    let m = BellState::PhiPlus.density().matrix().map(|z| z * f)
        + BellState::PhiMinus.density().matrix().map(|z| z * (1.0 - f));
    Ok(DensityMatrix::from_valid(m, 2))
}

/// Overlap `⟨Φ⁺| ρ̂ |Φ⁺⟩` of the *normalized* two-qubit state with the
/// target Bell state. Subnormalized inputs are normalized first, so
/// the result is a conditional fidelity.
pub fn entanglement_fidelity(state: &DensityMatrix) -> Result<f64> {
    if state.n_qubits() != 2 {
        return Err(Error::Dimension(format!(
            "entanglement fidelity needs a 2-qubit state, got {} qubits",
            state.n_qubits()
        )));
    }
    let normalized = state.normalized()?;
    let v = BellState::PhiPlus.vector();
    let val = (v.adjoint() * normalized.matrix() * &v)[(0, 0)];
    Ok(val.re)
}

/// Expectation value `Tr(ρ O)` of a Hermitian operator.
pub fn expectation(state: &DensityMatrix, op: &CMat) -> Result<f64> {
    if op.nrows() != state.dim() || op.ncols() != state.dim() {
        return Err(Error::Dimension(format!(
            "operator is {}×{}, state dimension is {}",
            op.nrows(),
            op.ncols(),
            state.dim()
        )));
    }
    Ok((state.matrix() * op).trace().re)
}

/// Off-diagonal distance between two states (largest entry-wise
/// difference); zero iff equal.
pub fn state_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    max_abs_diff(a.matrix(), b.matrix())
}

/// Complex trace of an arbitrary square matrix (convenience re-export
/// used by channel code working on raw matrices).
pub fn trace_of(m: &CMat) -> Complex64 {
    m.trace()
}

/// Pure single-qubit `|0⟩` as a convenience.
pub fn qubit_zero() -> DensityMatrix {
    DensityMatrix::basis(&[0])
}

/// Pure single-qubit ket `α|0⟩ + β|1⟩` (normalized by the caller).
pub fn qubit_ket(alpha: Complex64, beta: Complex64) -> CVec {
    let mut v = CVec::zeros(2);
    v[0] = alpha;
    v[1] = beta;
    v
}
