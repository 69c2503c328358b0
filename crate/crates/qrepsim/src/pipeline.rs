//! Register-level circuit pipelines and tomographic compression.
//!
//! A [`Pipeline`] is an ordered sequence of channels, each applied to a
//! subset of a fixed qubit register. Steps are stored as full-register
//! Kraus operators, so applying a pipeline to a state costs a handful
//! of dense matrix products per step.
//!
//! [`Pipeline::compress`] turns a pipeline into a single [`Channel`]
//! between chosen input and output qubits by process tomography: one
//! register run per input matrix unit `|i⟩⟨j|`, with all other qubits
//! initialized from a fixed reference state.

use crate::channel::{embed_kraus_ops, Channel};
use crate::linalg::{self, kron, partial_trace_matrix, qubit_permutation, vec_of, CMat};
use crate::states::DensityMatrix;
use crate::{Error, Result};

struct Step {
    /// Kraus operators pre-embedded into the full register.
    ops: Vec<CMat>,
}

/// An ordered sequence of channels on a fixed-size qubit register.
pub struct Pipeline {
    n_qubits: usize,
    steps: Vec<Step>,
}

impl Pipeline {
    /// Empty pipeline on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Self {
        assert!(n_qubits > 0 && n_qubits <= 12, "register size out of range");
        Self {
            n_qubits,
            steps: Vec::new(),
        }
    }

    /// Register size.
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of steps pushed so far.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// Whether the pipeline has no steps.
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Appends `channel` acting on `targets` (channel qubit `j` ↦
    /// register qubit `targets[j]`).
    pub fn push(&mut self, channel: &Channel, targets: &[usize]) -> Result<&mut Self> {
        let kraus = channel.to_kraus()?;
        if channel.dim() != 1usize << targets.len() {
            return Err(Error::Dimension(format!(
                "channel dimension {} does not match {} target qubits",
                channel.dim(),
                targets.len()
            )));
        }
        let mut seen = vec![false; self.n_qubits];
        for &t in targets {
            if t >= self.n_qubits {
                return Err(Error::Dimension(format!(
                    "target qubit {t} out of range for {}-qubit register",
                    self.n_qubits
                )));
            }
            if seen[t] {
                return Err(Error::Dimension(format!("target qubit {t} listed twice")));
            }
            seen[t] = true;
        }
        let ops = embed_kraus_ops(kraus.ops(), targets, self.n_qubits, targets.len());
        self.steps.push(Step { ops });
        Ok(self)
    }

    /// Applies every step in order to a raw register matrix.
    pub fn apply_matrix(&self, m: &CMat) -> CMat {
        let mut cur = m.clone();
        for step in &self.steps {
            let mut next = linalg::zeros(cur.nrows());
            for op in &step.ops {
                next += op * &cur * op.adjoint();
            }
            cur = next;
        }
        cur
    }

    /// Applies the pipeline to a register state.
    pub fn apply(&self, state: &DensityMatrix) -> Result<DensityMatrix> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(format!(
                "state has {} qubits, pipeline register has {}",
                state.n_qubits(),
                self.n_qubits
            )));
        }
        DensityMatrix::new_subnormalized(self.apply_matrix(state.matrix()))
    }

    /// Compresses the pipeline into one channel from the `input`
    /// qubits to the `keep` qubits.
    ///
    /// All qubits outside `input` are initialized from `reference`
    /// (ordered by ascending register index); after the pipeline runs,
    /// all qubits outside `keep` are traced out. `input` and `keep`
    /// must have equal length so the result is a square channel.
    ///
    /// The returned probability is the average output trace over a
    /// maximally mixed input — exactly 1 for trace-preserving
    /// pipelines, and the tomography-averaged success probability when
    /// the pipeline contains post-selected branches.
    pub fn compress(
        &self,
        input: &[usize],
        keep: &[usize],
        reference: &DensityMatrix,
    ) -> Result<(Channel, f64)> {
        if input.len() != keep.len() {
            return Err(Error::Dimension(format!(
                "input ({}) and keep ({}) qubit counts differ",
                input.len(),
                keep.len()
            )));
        }
        if input.is_empty() || input.len() > self.n_qubits {
            return Err(Error::Dimension("invalid input qubit count".into()));
        }
        let mut seen = vec![false; self.n_qubits];
        for &q in input {
            if q >= self.n_qubits || seen[q] {
                return Err(Error::Dimension(format!("bad input qubit list: {input:?}")));
            }
            seen[q] = true;
        }
        let mut seen_keep = vec![false; self.n_qubits];
        for &q in keep {
            if q >= self.n_qubits || seen_keep[q] {
                return Err(Error::Dimension(format!("bad keep qubit list: {keep:?}")));
            }
            seen_keep[q] = true;
        }
        let n_ref = self.n_qubits - input.len();
        if reference.n_qubits() != n_ref {
            return Err(Error::Dimension(format!(
                "reference state has {} qubits, expected {n_ref}",
                reference.n_qubits()
            )));
        }

        // Permutation moving the input qubits (in order) to the front.
        let mut perm = vec![usize::MAX; self.n_qubits];
        for (j, &q) in input.iter().enumerate() {
            perm[q] = j;
        }
        let mut next = input.len();
        for slot in perm.iter_mut() {
            if *slot == usize::MAX {
                *slot = next;
                next += 1;
            }
        }
        let p = qubit_permutation(self.n_qubits, &perm);
        let p_dag = p.adjoint();

        let d_in = 1usize << input.len();
        let mut superop = linalg::zeros(d_in * d_in);
        for j_col in 0..d_in {
            for jp_col in 0..d_in {
                // Input matrix unit |j⟩⟨j'| on the input block.
                let mut unit = linalg::zeros(d_in);
                unit[(j_col, jp_col)] = linalg::c(1.0, 0.0);
                let front = kron(&unit, reference.matrix());
                let full_in = &p_dag * front * &p;
                let full_out = self.apply_matrix(&full_in);
                let reduced = partial_trace_matrix(&full_out, self.n_qubits, keep);
                let col_vec = vec_of(&reduced);
                let col = j_col + d_in * jp_col;
                for r in 0..d_in * d_in {
                    superop[(r, col)] = col_vec[r];
                }
            }
        }
        let channel = Channel::from_parts(superop, d_in);
        channel.validate_cp()?;

        // Average success probability: Tr(ℰ(I/d)).
        let mut prob = 0.0;
        for j in 0..d_in {
            let col = j + d_in * j;
            for i in 0..d_in {
                prob += channel.superop()[(i + d_in * i, col)].re;
            }
        }
        prob /= d_in as f64;
        Ok((channel, prob))
    }
}

/// Free-function form of [`Pipeline::compress`].
pub fn compress(
    pipeline: &Pipeline,
    input: &[usize],
    keep: &[usize],
    reference: &DensityMatrix,
) -> Result<(Channel, f64)> {
    pipeline.compress(input, keep, reference)
}

/// Applies a channel to selected qubits of a register state without
/// building a full-register superoperator.
pub fn apply_on(
    state: &DensityMatrix,
    channel: &Channel,
    targets: &[usize],
) -> Result<DensityMatrix> {
    if channel.dim() != 1usize << targets.len() {
        return Err(Error::Dimension(format!(
            "channel dimension {} does not match {} target qubits",
            channel.dim(),
            targets.len()
        )));
    }
    let mut seen = vec![false; state.n_qubits()];
    for &t in targets {
        if t >= state.n_qubits() {
            return Err(Error::Dimension(format!(
                "target qubit {t} out of range for {}-qubit state",
                state.n_qubits()
            )));
        }
        if seen[t] {
            return Err(Error::Dimension(format!("target qubit {t} listed twice")));
        }
        seen[t] = true;
    }
    let kraus = channel.to_kraus()?;
    let ops = embed_kraus_ops(kraus.ops(), targets, state.n_qubits(), targets.len());
    let mut out = linalg::zeros(state.dim());
    for op in &ops {
        out += op * state.matrix() * op.adjoint();
    }
    DensityMatrix::new_subnormalized(out)
}
