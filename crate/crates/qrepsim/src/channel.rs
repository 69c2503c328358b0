//! Quantum channels as superoperator matrices, with conversions to and
//! from Kraus and Choi representations.
//!
//! A channel on a `d`-dimensional system is stored as the `d² × d²`
//! matrix `S` acting on column-stacked density matrices:
//! `vec(ℰ(ρ)) = S · vec(ρ)` with `vec(ρ)[i + d·j] = ρ[i, j]`.
//! For Kraus operators `{E_k}`, `S = Σ_k conj(E_k) ⊗ E_k`.
//!
//! Channels are completely positive and trace *non-increasing*;
//! post-selected measurement branches carry their probability in the
//! trace. The `trace_preserving` flag records whether the map is
//! exactly trace preserving (within the global tolerance).

use crate::linalg::{
    self, kron, max_abs_diff, qubit_permutation, unvec, vec_of, CMat, CVec,
};
use crate::states::DensityMatrix;
use crate::{tolerance, Error, Result};
use num_complex::Complex64;

/// Eigenvalues of the Choi matrix below this threshold are treated as
/// exact zeros when extracting Kraus operators.
const CHOI_EIGENVALUE_CLIP: f64 = 1e-12;

/// A validated set of Kraus operators `{E_k}` on one dimension with
/// `Σ E_k† E_k ≤ I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    ops: Vec<CMat>,
    dim: usize,
}

impl KrausSet {
    /// Validates dimensions and the trace-non-increasing condition.
    pub fn new(ops: Vec<CMat>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidChannel(
                "a Kraus set needs at least one operator".into(),
            ));
        }
        let dim = ops[0].nrows();
        for (k, op) in ops.iter().enumerate() {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "Kraus operator {k} is {}×{}, expected {dim}×{dim}",
                    op.nrows(),
                    op.ncols()
                )));
            }
        }
        let set = Self { ops, dim };
        let sum = set.completeness_sum();
        let (vals, _) = linalg::hermitian_eigen(&sum);
        let max = vals.iter().cloned().fold(0.0, f64::max);
        if max > 1.0 + tolerance() {
            return Err(Error::InvalidChannel(format!(
                "Σ E†E has eigenvalue {max}, above 1: the map would increase trace"
            )));
        }
        Ok(set)
    }

    /// The operators.
    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    /// System dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Σ_k E_k† E_k`.
    pub fn completeness_sum(&self) -> CMat {
        let mut sum = linalg::zeros(self.dim);
        for op in &self.ops {
            sum += op.adjoint() * op;
        }
        sum
    }

    /// Largest entry-wise deviation of `Σ E†E` from the identity;
    /// zero (within tolerance) means a trace-preserving map.
    pub fn completeness_deviation(&self) -> f64 {
        max_abs_diff(&self.completeness_sum(), &linalg::identity(self.dim))
    }

    /// Applies `Σ_k E_k m E_k†` to a raw matrix.
    pub fn apply_matrix(&self, m: &CMat) -> CMat {
        let mut out = linalg::zeros(self.dim);
        for op in &self.ops {
            out += op * m * op.adjoint();
        }
        out
    }
}

/// A completely positive, trace-non-increasing map in superoperator
/// form.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dim: usize,
    superop: CMat,
    trace_preserving: bool,
}

impl Channel {
    /// Builds a channel from Kraus operators.
    pub fn from_kraus(kraus: &KrausSet) -> Self {
        let d2 = kraus.dim * kraus.dim;
        let mut superop = linalg::zeros(d2);
        for op in &kraus.ops {
            superop += kron(&op.map(|z| z.conj()), op);
        }
        let trace_preserving = tp_deviation_of(&superop, kraus.dim) <= tolerance();
        Self {
            dim: kraus.dim,
            superop,
            trace_preserving,
        }
    }

    /// Builds the unitary conjugation channel `ρ ↦ U ρ U†`.
    pub fn from_unitary(u: &CMat) -> Result<Self> {
        let dim = u.nrows();
        if u.ncols() != dim {
            return Err(Error::Dimension(format!(
                "unitary must be square, got {}×{}",
                u.nrows(),
                u.ncols()
            )));
        }
        if max_abs_diff(&(u.adjoint() * u), &linalg::identity(dim)) > tolerance() {
            return Err(Error::InvalidChannel(
                "matrix is not unitary within tolerance".into(),
            ));
        }
        Ok(Self {
            dim,
            superop: kron(&u.map(|z| z.conj()), u),
            trace_preserving: true,
        })
    }

    /// Identity channel.
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            superop: linalg::identity(dim * dim),
            trace_preserving: true,
        }
    }

    /// Builds a channel directly from a superoperator matrix after
    /// validating complete positivity (Choi Hermitian and positive
    /// semidefinite) and trace non-increase.
    pub fn from_superop(superop: CMat, dim: usize) -> Result<Self> {
        if superop.nrows() != dim * dim || superop.ncols() != dim * dim {
            return Err(Error::Dimension(format!(
                "superoperator is {}×{}, expected {0}×{0} for dimension {dim}",
                superop.nrows(),
                superop.ncols()
            )));
        }
        let ch = Self {
            dim,
            trace_preserving: tp_deviation_of(&superop, dim) <= tolerance(),
            superop,
        };
        ch.validate_cp()?;
        ch.validate_trace_non_increasing()?;
        Ok(ch)
    }

    /// Internal constructor for superoperators already known valid.
    pub(crate) fn from_parts(superop: CMat, dim: usize) -> Self {
        let trace_preserving = tp_deviation_of(&superop, dim) <= tolerance();
        Self {
            dim,
            superop,
            trace_preserving,
        }
    }

    /// The channel that replaces any unit-trace input by `target`
    /// (inputs with trace `t` map to `t · target`).
    pub fn constant(target: &DensityMatrix) -> Self {
        let dim = target.dim();
        let tvec = vec_of(target.matrix());
        let mut superop = linalg::zeros(dim * dim);
        for j in 0..dim {
            let col = j + dim * j;
            for r in 0..dim * dim {
                superop[(r, col)] = tvec[r];
            }
        }
        let trace_preserving = tp_deviation_of(&superop, dim) <= tolerance();
        Self {
            dim,
            superop,
            trace_preserving,
        }
    }

    /// System dimension `d` (the superoperator is `d² × d²`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The superoperator matrix.
    pub fn superop(&self) -> &CMat {
        &self.superop
    }

    /// Whether the map preserves trace exactly (within tolerance).
    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// Largest deviation from the trace-preservation identity
    /// `vec(I)ᵀ S = vec(I)ᵀ`.
    pub fn tp_deviation(&self) -> f64 {
        tp_deviation_of(&self.superop, self.dim)
    }

    /// Applies the channel to a raw matrix (no state validation).
    pub(crate) fn apply_matrix(&self, m: &CMat) -> CMat {
        let v = CVec::from_column_slice(m.as_slice());
        let out = &self.superop * v;
        unvec(out.as_slice(), self.dim)
    }

    /// Applies the channel to a state. Trace-decreasing channels
    /// yield subnormalized outputs whose trace is the accumulated
    /// branch probability.
    pub fn apply(&self, state: &DensityMatrix) -> Result<DensityMatrix> {
        if state.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "channel dimension {} does not match state dimension {}",
                self.dim,
                state.dim()
            )));
        }
        DensityMatrix::new_subnormalized(self.apply_matrix(state.matrix()))
    }

    /// Choi matrix `J = Σ_{j j'} |j⟩⟨j'| ⊗ ℰ(|j⟩⟨j'|)`.
    pub fn choi(&self) -> CMat {
        reshuffle_superop_to_choi(&self.superop, self.dim)
    }

    /// Verifies complete positivity: the Choi matrix must be
    /// Hermitian and positive semidefinite within the global
    /// tolerance.
    pub fn validate_cp(&self) -> Result<()> {
        let j = self.choi();
        if !linalg::is_hermitian(&j, tolerance()) {
            return Err(Error::InvalidChannel(
                "Choi matrix is not Hermitian: map is not completely positive".into(),
            ));
        }
        let (vals, _) = linalg::hermitian_eigen(&j);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -tolerance() {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix has eigenvalue {min}: map is not completely positive"
            )));
        }
        Ok(())
    }

    fn validate_trace_non_increasing(&self) -> Result<()> {
        // Tr(ℰ(ρ)) = Tr(M ρ) with M = Σ E†E; in superoperator terms
        // M[j', j] = Σ_i S[(i + d·i), (j + d·j')] conjugated suitably.
        // Extract M directly and check its largest eigenvalue.
        let d = self.dim;
        let mut m = linalg::zeros(d);
        for j in 0..d {
            for jp in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..d {
                    acc += self.superop[(i + d * i, j + d * jp)];
                }
                // Tr(ℰ(|j⟩⟨j'|)) = M[j', j] for M with ρ-trace form
                // Tr(M ρ); equivalently M[j, j'] = conj of the above
                // for Hermitian M. Store as produced; Hermiticity is
                // checked by the eigen solver usage below.
                m[(jp, j)] = acc;
            }
        }
        if !linalg::is_hermitian(&m, tolerance()) {
            return Err(Error::InvalidChannel(
                "trace form of the map is not Hermitian".into(),
            ));
        }
        let (vals, _) = linalg::hermitian_eigen(&m);
        let max = vals.iter().cloned().fold(0.0, f64::max);
        if max > 1.0 + tolerance() {
            return Err(Error::InvalidChannel(format!(
                "map can increase trace by factor {max}"
            )));
        }
        Ok(())
    }

    /// Extracts a Kraus representation from the Choi eigensystem.
    /// Fails if the map is not completely positive.
    pub fn to_kraus(&self) -> Result<KrausSet> {
        let j = self.choi();
        if !linalg::is_hermitian(&j, tolerance()) {
            return Err(Error::InvalidChannel(
                "Choi matrix is not Hermitian: no Kraus form exists".into(),
            ));
        }
        let (vals, vecs) = linalg::hermitian_eigen(&j);
        let mut ops = Vec::new();
        for k in 0..vals.len() {
            let lambda = vals[k];
            if lambda < -tolerance() {
                return Err(Error::InvalidChannel(format!(
                    "Choi matrix has eigenvalue {lambda}: no Kraus form exists"
                )));
            }
            if lambda > CHOI_EIGENVALUE_CLIP {
                let col = vecs.column(k).map(|z| z * lambda.sqrt());
                ops.push(unvec(col.as_slice(), self.dim));
            }
        }
        if ops.is_empty() {
            // The zero map: represent it with a single zero operator.
            ops.push(linalg::zeros(self.dim));
            return Ok(KrausSet {
                ops,
                dim: self.dim,
            });
        }
        KrausSet::new(ops)
    }

    /// Tensor product of two channels; `self` acts on the leading
    /// (most significant) factor.
    pub fn tensor(&self, other: &Channel) -> Channel {
        let da = self.dim;
        let db = other.dim;
        let d = da * db;
        let mut superop = linalg::zeros(d * d);
        for ia in 0..da {
            for ipa in 0..da {
                for ja in 0..da {
                    for jpa in 0..da {
                        let sa = self.superop[(ia + da * ipa, ja + da * jpa)];
                        if sa.norm_sqr() == 0.0 {
                            continue;
                        }
                        for ib in 0..db {
                            for ipb in 0..db {
                                for jb in 0..db {
                                    for jpb in 0..db {
                                        let sb =
                                            other.superop[(ib + db * ipb, jb + db * jpb)];
                                        if sb.norm_sqr() == 0.0 {
                                            continue;
                                        }
                                        let row = (ia * db + ib) + d * (ipa * db + ipb);
                                        let col = (ja * db + jb) + d * (jpa * db + jpb);
                                        superop[(row, col)] = sa * sb;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Channel::from_parts(superop, d)
    }

    /// Branch sum of two completely positive maps on the same system:
    /// the superoperators add. Used to combine post-selected
    /// measurement branches.
    pub fn try_add(&self, other: &Channel) -> Result<Channel> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "cannot add channels of dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        Ok(Channel::from_parts(&self.superop + &other.superop, self.dim))
    }

    /// Lifts a channel on `targets.len()` qubits to `system_qubits`
    /// qubits, acting as the identity elsewhere. `targets[j]` is the
    /// register qubit playing the role of the channel's qubit `j`.
    pub fn embed(&self, targets: &[usize], system_qubits: usize) -> Result<Channel> {
        let n_chan = check_embedding(self.dim, targets, system_qubits)?;
        let kraus = self.to_kraus()?;
        let full_ops = embed_kraus_ops(kraus.ops(), targets, system_qubits, n_chan);
        Ok(Channel::from_kraus(&KrausSet {
            ops: full_ops,
            dim: 1 << system_qubits,
        }))
    }

    /// Serializes to a line-oriented text format with exact float
    /// round-tripping (shortest-representation decimal).
    pub fn to_text(&self) -> String {
        let d2 = self.dim * self.dim;
        let mut out = String::new();
        out.push_str("qrepsim-channel v1\n");
        out.push_str(&format!("dim {}\n", self.dim));
        out.push_str("vectorization column-stacking\n");
        out.push_str(&format!("trace_preserving {}\n", self.trace_preserving));
        for r in 0..d2 {
            let mut line = String::new();
            for col in 0..d2 {
                if col > 0 {
                    line.push(' ');
                }
                let z = self.superop[(r, col)];
                line.push_str(&format!("{:?} {:?}", z.re, z.im));
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Parses the format produced by [`Channel::to_text`].
    pub fn from_text(text: &str) -> Result<Channel> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Serialization("empty input".into()))?;
        if header.trim() != "qrepsim-channel v1" {
            return Err(Error::Serialization(format!(
                "unrecognized header line: {header:?}"
            )));
        }
        let dim_line = lines
            .next()
            .ok_or_else(|| Error::Serialization("missing dim line".into()))?;
        let dim: usize = dim_line
            .strip_prefix("dim ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Serialization(format!("bad dim line: {dim_line:?}")))?;
        let conv_line = lines
            .next()
            .ok_or_else(|| Error::Serialization("missing vectorization line".into()))?;
        if conv_line.trim() != "vectorization column-stacking" {
            return Err(Error::Serialization(format!(
                "unsupported vectorization convention: {conv_line:?}"
            )));
        }
        let tp_line = lines
            .next()
            .ok_or_else(|| Error::Serialization("missing trace_preserving line".into()))?;
        let trace_preserving: bool = tp_line
            .strip_prefix("trace_preserving ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| {
                Error::Serialization(format!("bad trace_preserving line: {tp_line:?}"))
            })?;
        let d2 = dim * dim;
        let mut superop = linalg::zeros(d2);
        for r in 0..d2 {
            let line = lines.next().ok_or_else(|| {
                Error::Serialization(format!("missing matrix row {r} of {d2}"))
            })?;
            let mut nums = line.split_whitespace();
            for col in 0..d2 {
                let re: f64 = nums
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| {
                        Error::Serialization(format!("row {r}: bad real part at column {col}"))
                    })?;
                let im: f64 = nums
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| {
                        Error::Serialization(format!(
                            "row {r}: bad imaginary part at column {col}"
                        ))
                    })?;
                superop[(r, col)] = Complex64::new(re, im);
            }
            if nums.next().is_some() {
                return Err(Error::Serialization(format!(
                    "row {r}: more entries than expected"
                )));
            }
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::Serialization("trailing content after matrix".into()));
        }
        Ok(Channel {
            dim,
            superop,
            trace_preserving,
        })
    }
}

/// Sequential composition: `compose(second, first)` applies `first`,
/// then `second`.
pub fn compose(second: &Channel, first: &Channel) -> Result<Channel> {
    if second.dim != first.dim {
        return Err(Error::Dimension(format!(
            "cannot compose channels of dimensions {} and {}",
            second.dim, first.dim
        )));
    }
    Ok(Channel::from_parts(
        &second.superop * &first.superop,
        first.dim,
    ))
}

/// Free-function form of [`Channel::from_kraus`].
pub fn kraus_to_channel(kraus: &KrausSet) -> Channel {
    Channel::from_kraus(kraus)
}

/// Free-function form of [`Channel::to_kraus`].
pub fn channel_to_kraus(channel: &Channel) -> Result<KrausSet> {
    channel.to_kraus()
}

/// Free-function form of [`Channel::constant`].
pub fn constant_channel(target: &DensityMatrix) -> Channel {
    Channel::constant(target)
}

/// Free-function form of [`Channel::embed`].
pub fn embed(channel: &Channel, targets: &[usize], system_qubits: usize) -> Result<Channel> {
    channel.embed(targets, system_qubits)
}

fn check_embedding(dim: usize, targets: &[usize], system_qubits: usize) -> Result<usize> {
    if targets.is_empty() {
        return Err(Error::Dimension("embedding needs target qubits".into()));
    }
    let n_chan = targets.len();
    if dim != 1usize << n_chan {
        return Err(Error::Dimension(format!(
            "channel dimension {dim} does not match {n_chan} target qubits"
        )));
    }
    if n_chan > system_qubits {
        return Err(Error::Dimension(format!(
            "{n_chan} targets exceed system size {system_qubits}"
        )));
    }
    let mut seen = vec![false; system_qubits];
    for &t in targets {
        if t >= system_qubits {
            return Err(Error::Dimension(format!(
                "target qubit {t} out of range for {system_qubits}-qubit system"
            )));
        }
        if seen[t] {
            return Err(Error::Dimension(format!("target qubit {t} listed twice")));
        }
        seen[t] = true;
    }
    Ok(n_chan)
}

/// Builds full-register Kraus operators `P† (E_k ⊗ I) P`, where `P`
/// moves the target qubits (in order) to the front of the register.
pub(crate) fn embed_kraus_ops(
    ops: &[CMat],
    targets: &[usize],
    system_qubits: usize,
    n_chan: usize,
) -> Vec<CMat> {
    let mut perm = vec![usize::MAX; system_qubits];
    for (j, &t) in targets.iter().enumerate() {
        perm[t] = j;
    }
    let mut next = n_chan;
    for slot in perm.iter_mut() {
        if *slot == usize::MAX {
            *slot = next;
            next += 1;
        }
    }
    let p = qubit_permutation(system_qubits, &perm);
    let p_dag = p.adjoint();
    let rest = linalg::identity(1 << (system_qubits - n_chan));
    ops.iter()
        .map(|e| &p_dag * kron(e, &rest) * &p)
        .collect()
}

/// Reshuffles a superoperator into its Choi matrix:
/// `J[(j·d + i), (j'·d + i')] = S[(i + d·i'), (j + d·j')]`.
pub fn reshuffle_superop_to_choi(superop: &CMat, dim: usize) -> CMat {
    let d2 = dim * dim;
    let mut j_mat = linalg::zeros(d2);
    for i in 0..dim {
        for ip in 0..dim {
            for j in 0..dim {
                for jp in 0..dim {
                    j_mat[(j * dim + i, jp * dim + ip)] = superop[(i + dim * ip, j + dim * jp)];
                }
            }
        }
    }
    j_mat
}

/// Inverse of [`reshuffle_superop_to_choi`].
pub fn reshuffle_choi_to_superop(choi: &CMat, dim: usize) -> CMat {
    let d2 = dim * dim;
    let mut s = linalg::zeros(d2);
    for i in 0..dim {
        for ip in 0..dim {
            for j in 0..dim {
                for jp in 0..dim {
                    s[(i + dim * ip, j + dim * jp)] = choi[(j * dim + i, jp * dim + ip)];
                }
            }
        }
    }
    s
}

fn tp_deviation_of(superop: &CMat, dim: usize) -> f64 {
    // Trace preservation ⟺ vec(I)ᵀ S = vec(I)ᵀ.
    let d2 = dim * dim;
    let mut worst = 0.0f64;
    for col in 0..d2 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            acc += superop[(i + dim * i, col)];
        }
        let expect = if col % dim == col / dim { 1.0 } else { 0.0 };
        worst = worst.max((acc - Complex64::new(expect, 0.0)).norm());
    }
    worst
}
