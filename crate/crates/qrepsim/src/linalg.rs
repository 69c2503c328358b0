//! Dense complex linear algebra helpers shared by the whole crate.
//!
//! Conventions (pinned once, relied on everywhere):
//!
//! - Qubit 0 is the *leftmost* tensor factor, i.e. the most significant
//!   bit of a basis-state index.
//! - `|0⟩ = (1, 0)ᵀ`.
//! - Rotations are `R_α(θ) = exp(−i θ σ_α / 2)`.
//! - Vectorization is column-stacking: `vec(ρ)[i + d·j] = ρ[i, j]`.
//!   `nalgebra` stores matrices column-major, so `m.as_slice()` *is*
//!   `vec(m)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense dynamically-sized complex matrix.
pub type CMat = DMatrix<Complex64>;
/// Dense dynamically-sized complex vector.
pub type CVec = DVector<Complex64>;

/// Shorthand complex constructor.
#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `dim × dim` identity matrix.
pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// `dim × dim` zero matrix.
pub fn zeros(dim: usize) -> CMat {
    CMat::zeros(dim, dim)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&CMat]) -> CMat {
    assert!(!factors.is_empty(), "kron_all needs at least one factor");
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = out.kronecker(f);
    }
    out
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

/// Pauli σ_x.
pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

/// Pauli σ_y.
pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

/// Pauli σ_z.
pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// Hadamard gate.
pub fn hadamard() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

/// `R_x(θ) = exp(−i θ σ_x / 2)` in closed form.
pub fn rot_x(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    CMat::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
}

/// `R_y(θ) = exp(−i θ σ_y / 2)` in closed form.
pub fn rot_y(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    CMat::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

/// `R_z(θ) = exp(−i θ σ_z / 2)` in closed form.
pub fn rot_z(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    CMat::from_row_slice(
        2,
        2,
        &[c(co, -s), c(0.0, 0.0), c(0.0, 0.0), c(co, s)],
    )
}

/// Basis column vector `|i⟩` of the given dimension.
pub fn basis_ket(dim: usize, i: usize) -> CVec {
    assert!(i < dim, "basis index {i} out of range for dim {dim}");
    let mut v = CVec::zeros(dim);
    v[i] = c(1.0, 0.0);
    v
}

/// Multi-qubit basis ket from bits, qubit 0 first (most significant).
pub fn ket_from_bits(bits: &[u8]) -> CVec {
    let n = bits.len();
    let mut idx = 0usize;
    for (k, b) in bits.iter().enumerate() {
        assert!(*b <= 1, "bit values must be 0 or 1");
        idx |= (*b as usize) << (n - 1 - k);
    }
    basis_ket(1 << n, idx)
}

/// Outer product `a b†`.
pub fn outer(a: &CVec, b: &CVec) -> CMat {
    a * b.adjoint()
}

/// Largest entry magnitude of a matrix.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry-wise difference between two equally sized matrices.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Checks Hermiticity to the given entry-wise tolerance.
pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.nrows() == m.ncols() && max_abs_diff(m, &m.adjoint()) <= tol
}

/// Column-stacking vectorization of a square matrix.
pub fn vec_of(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`]: rebuilds a `dim × dim` matrix.
pub fn unvec(v: &[Complex64], dim: usize) -> CMat {
    assert_eq!(v.len(), dim * dim, "unvec length mismatch");
    CMat::from_column_slice(dim, dim, v)
}

/// Matrix exponential by scaling and squaring with a Taylor series.
///
/// The argument is scaled by `2^−s` until its Frobenius norm is below
/// 1/2; the series then converges to machine precision well within the
/// fixed term budget. Deterministic (no pivoting, no branching on
/// data beyond the norm).
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = a.norm();
    let s: i32 = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scale = 2f64.powi(-s);
    let scaled = a.map(|z| z * scale);
    let mut term = identity(n);
    let mut sum = identity(n);
    for k in 1..=30 {
        term = (&term * &scaled).map(|z| z / k as f64);
        sum += &term;
        if max_abs(&term) < 1e-18 {
            break;
        }
    }
    let mut out = sum;
    for _ in 0..s {
        out = &out * &out;
    }
    out
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns `(eigenvalues, eigenvectors)` with real eigenvalues in the
/// order produced by the solver and eigenvectors as the corresponding
/// columns, so that `m = V · diag(λ) · V†`.
pub fn hermitian_eigen(m: &CMat) -> (DVector<f64>, CMat) {
    let se = nalgebra::SymmetricEigen::new(m.clone());
    (se.eigenvalues, se.eigenvectors)
}

/// Unitary permutation of qubit wires.
///
/// `perm[k]` is the *new* position of the qubit currently at position
/// `k`; the returned matrix `P` satisfies `P |b_0 b_1 …⟩ = |c_0 c_1 …⟩`
/// with `c_{perm[k]} = b_k`. Conjugating an operator by `P` relabels
/// the wires accordingly.
pub fn qubit_permutation(n_qubits: usize, perm: &[usize]) -> CMat {
    assert_eq!(perm.len(), n_qubits, "permutation length mismatch");
    let mut seen = vec![false; n_qubits];
    for &p in perm {
        assert!(p < n_qubits && !seen[p], "not a permutation: {perm:?}");
        seen[p] = true;
    }
    let dim = 1usize << n_qubits;
    let mut p_mat = zeros(dim);
    for b in 0..dim {
        let mut target = 0usize;
        for k in 0..n_qubits {
            let bit = (b >> (n_qubits - 1 - k)) & 1;
            target |= bit << (n_qubits - 1 - perm[k]);
        }
        p_mat[(target, b)] = c(1.0, 0.0);
    }
    p_mat
}

/// Partial trace over all qubits not listed in `keep`.
///
/// The output orders its qubits as listed in `keep` (so `keep = [2, 0]`
/// puts old qubit 2 first). Panics on invalid indices; the public
/// state-level wrapper validates and returns errors instead.
pub fn partial_trace_matrix(m: &CMat, n_qubits: usize, keep: &[usize]) -> CMat {
    let dim = 1usize << n_qubits;
    assert_eq!(m.nrows(), dim, "matrix does not match qubit count");
    assert_eq!(m.ncols(), dim, "matrix does not match qubit count");
    let mut seen = vec![false; n_qubits];
    for &q in keep {
        assert!(q < n_qubits && !seen[q], "invalid keep list: {keep:?}");
        seen[q] = true;
    }
    let traced: Vec<usize> = (0..n_qubits).filter(|q| !seen[*q]).collect();
    let kd = 1usize << keep.len();
    let td = 1usize << traced.len();
    let mut out = zeros(kd);
    for row in 0..kd {
        for col in 0..kd {
            let mut row_base = 0usize;
            let mut col_base = 0usize;
            for (j, &q) in keep.iter().enumerate() {
                let rb = (row >> (keep.len() - 1 - j)) & 1;
                let cb = (col >> (keep.len() - 1 - j)) & 1;
                row_base |= rb << (n_qubits - 1 - q);
                col_base |= cb << (n_qubits - 1 - q);
            }
            let mut acc = c(0.0, 0.0);
            for t in 0..td {
                let mut full_row = row_base;
                let mut full_col = col_base;
                for (j, &q) in traced.iter().enumerate() {
                    let tb = (t >> (traced.len() - 1 - j)) & 1;
                    full_row |= tb << (n_qubits - 1 - q);
                    full_col |= tb << (n_qubits - 1 - q);
                }
                acc += m[(full_row, full_col)];
            }
            out[(row, col)] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pauli_algebra_holds() {
        let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
        assert!(max_abs_diff(&(&x * &x), &identity(2)) < 1e-15);
        let xy = &x * &y;
        let expect = pauli_z().map(|v| v * c(0.0, 1.0));
        assert!(max_abs_diff(&xy, &expect) < 1e-15);
        assert!(max_abs_diff(&(&y * &z), &x.map(|v| v * c(0.0, 1.0))) < 1e-15);
    }

    #[test]
    fn rotations_match_matrix_exponentials() {
        for theta in [0.3, 1.1, -2.4, std::f64::consts::PI] {
            for (gen, rot) in [
                (pauli_x(), rot_x(theta)),
                (pauli_y(), rot_y(theta)),
                (pauli_z(), rot_z(theta)),
            ] {
                let arg = gen.map(|v| v * c(0.0, -theta / 2.0));
                assert!(max_abs_diff(&expm(&arg), &rot) < 1e-13, "θ = {theta}");
            }
        }
    }

    #[test]
    fn expm_of_zero_is_identity() {
        assert!(max_abs_diff(&expm(&zeros(4)), &identity(4)) < 1e-15);
    }

    #[test]
    fn expm_handles_large_norm_arguments() {
        // exp(−i θ σ_x / 2) for θ large enough to force several
        // squaring steps.
        let theta = 40.0;
        let arg = pauli_x().map(|v| v * c(0.0, -theta / 2.0));
        assert!(max_abs_diff(&expm(&arg), &rot_x(theta)) < 1e-12);
    }

    #[test]
    fn kron_matches_hand_expansion() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let b = pauli_x();
        let k = kron(&a, &b);
        assert_eq!(k.nrows(), 4);
        assert_relative_eq!(k[(0, 1)].re, 1.0);
        assert_relative_eq!(k[(0, 0)].re, 0.0);
        assert_relative_eq!(k[(2, 1)].re, 3.0);
        assert_relative_eq!(k[(3, 0)].re, 3.0);
        assert_relative_eq!(k[(2, 3)].re, 4.0);
    }

    #[test]
    fn hermitian_eigen_reconstructs_input() {
        // A 4×4 Hermitian matrix with non-trivial complex structure.
        let mut m = zeros(4);
        m[(0, 1)] = c(0.3, 0.7);
        m[(1, 0)] = c(0.3, -0.7);
        m[(2, 3)] = c(-0.2, 0.1);
        m[(3, 2)] = c(-0.2, -0.1);
        m[(0, 0)] = c(1.5, 0.0);
        m[(1, 1)] = c(-0.5, 0.0);
        m[(2, 2)] = c(0.25, 0.0);
        m[(3, 3)] = c(2.0, 0.0);
        let (vals, vecs) = hermitian_eigen(&m);
        let mut rebuilt = zeros(4);
        for k in 0..4 {
            let col = vecs.column(k).into_owned();
            rebuilt += outer(&col, &col).map(|v| v * c(vals[k], 0.0));
        }
        assert!(max_abs_diff(&rebuilt, &m) < 1e-10);
    }

    #[test]
    fn ket_from_bits_uses_msb_first_ordering() {
        // Qubit 0 is the most significant bit: |10⟩ has index 2.
        let v = ket_from_bits(&[1, 0]);
        assert_relative_eq!(v[2].re, 1.0);
        assert_relative_eq!(v[0].re, 0.0);
    }

    #[test]
    fn qubit_permutation_swaps_wires() {
        // Swap the two qubits of |10⟩ → |01⟩.
        let p = qubit_permutation(2, &[1, 0]);
        let v = &p * ket_from_bits(&[1, 0]);
        assert_relative_eq!((v - ket_from_bits(&[0, 1])).norm(), 0.0, epsilon = 1e-15);
        // Three wires: send 0→2, 1→0, 2→1, so |100⟩ → |001⟩.
        let p3 = qubit_permutation(3, &[2, 0, 1]);
        let v3 = &p3 * ket_from_bits(&[1, 0, 0]);
        assert_relative_eq!(
            (v3 - ket_from_bits(&[0, 0, 1])).norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn partial_trace_of_product_state_recovers_factor() {
        let a = CMat::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
        let b = CMat::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, -0.1), c(0.0, 0.1), c(0.4, 0.0)]);
        let joint = kron(&a, &b);
        assert!(max_abs_diff(&partial_trace_matrix(&joint, 2, &[0]), &a) < 1e-14);
        assert!(max_abs_diff(&partial_trace_matrix(&joint, 2, &[1]), &b) < 1e-14);
    }

    #[test]
    fn partial_trace_keep_order_reorders_output() {
        let a = CMat::from_row_slice(2, 2, &[c(0.9, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.1, 0.0)]);
        let b = CMat::from_row_slice(2, 2, &[c(0.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.8, 0.0)]);
        let joint = kron(&a, &kron(&b, &identity(2).map(|v| v * c(0.5, 0.0))));
        let swapped = partial_trace_matrix(&joint, 3, &[1, 0]);
        assert!(max_abs_diff(&swapped, &kron(&b, &a)) < 1e-14);
    }

    #[test]
    fn vec_round_trip_is_exact() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 2.0), c(3.0, 4.0), c(5.0, 6.0), c(7.0, 8.0)]);
        let v = vec_of(&m);
        // Column-stacking: entry (1,0) sits at index 1, entry (0,1) at 2.
        assert_relative_eq!(v[1].re, 5.0);
        assert_relative_eq!(v[2].re, 3.0);
        assert!(max_abs_diff(&unvec(v.as_slice(), 2), &m) < 1e-15);
    }
}
