//! Protocol building blocks: entanglement transfer, entanglement
//! swapping (single and chained), and entanglement purification.
//!
//! Every block simulates a small qubit register exactly, slot by slot,
//! with each physical operation's duration driving the dephasing of
//! every idle bare atom. Measurement outcomes become post-selected
//! branch pipelines; feed-forward corrections recombine branches into
//! a deterministic channel, while genuine post-selection (purification
//! coincidence) leaves the trace of the output carrying the success
//! probability.
//!
//! Pair states use geographic order: qubit 0 is the left node's half,
//! qubit 1 the right node's half.

use crate::channel::{compose, Channel};
use crate::dfs::{
    cnot_dfs, controlled_minus_z_aux_dfs, controlled_minus_z_dfs_dfs, dfs_hadamard_duration,
    measure_dfs, DFS_X_ROTATION_TIME,
};
use crate::linalg::{hadamard, pauli_x, pauli_z, rot_x, rot_z};
use crate::noise::{idle, ising_gate, noisy_rotation, povm_measure, NoiseParams, PauliAxis};
use crate::pipeline::Pipeline;
use crate::states::DensityMatrix;
use crate::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI};

/// Which hardware family a repeater (or block) runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepeaterKind {
    /// Bare atoms everywhere; idle qubits dephase.
    Atom,
    /// Dephasing-protected encoded registers above level 0.
    Dfs,
}

/// Hardware carrying the kept and sacrificed pairs of a purification
/// round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PurifyPairKind {
    /// Both pairs on bare atoms.
    AtomAtom,
    /// Kept pair encoded, pumped by fresh bare-atom pairs.
    AuxDfs,
    /// Both pairs encoded.
    DfsDfs,
}

/// Output of one protocol block.
#[derive(Debug, Clone)]
pub struct BlockResult {
    /// The block as a channel from its input pair to its kept pair
    /// (branch-summed; trace non-increasing when post-selected).
    pub channel: Channel,
    /// Normalized state of the kept pair for the actual inputs.
    pub state: DensityMatrix,
    /// Probability that the block's post-selection succeeds for the
    /// actual inputs (1 for deterministic blocks).
    pub success_probability: f64,
    /// Wall-clock duration charged to the block in the lower-bound
    /// timing model (fast feed-forward correction slots excluded).
    pub duration: f64,
}

fn check_pair(state: &DensityMatrix, what: &str) -> Result<()> {
    if state.n_qubits() != 2 {
        return Err(Error::Dimension(format!(
            "{what} must be a 2-qubit pair state, got {} qubits",
            state.n_qubits()
        )));
    }
    Ok(())
}

fn finish_block(
    channel: Channel,
    input: &DensityMatrix,
    duration: f64,
) -> Result<BlockResult> {
    let raw = channel.apply(input)?;
    let success_probability = raw.trace();
    let state = raw.normalized()?;
    Ok(BlockResult {
        channel,
        state,
        success_probability,
        duration,
    })
}

fn idle_each(
    pipe: &mut Pipeline,
    params: &NoiseParams,
    t: f64,
    qubits: &[usize],
) -> Result<()> {
    if t <= 0.0 || params.gamma == 0.0 {
        // A zero-duration or noiseless idle is the identity; still
        // validate the duration sign.
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "negative idle duration {t}"
            )));
        }
        return Ok(());
    }
    let ch = idle(params, t)?;
    for &q in qubits {
        pipe.push(&ch, &[q])?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Block durations in the lower-bound timing model.
// ---------------------------------------------------------------------------

/// Duration of one bare-atom swap attempt: the Bell analyzer's local
/// slots plus the measurement, `9π/(4Ω) + π/(4Ω_zz) + t_me`.
pub fn atom_swap_duration(params: &NoiseParams) -> f64 {
    9.0 * PI / (4.0 * params.omega) + PI / (4.0 * params.omega_zz) + params.t_me
}

/// Duration of the measurement-free atom-to-atom transfer,
/// `5π/(2Ω) + π/(2Ω_zz)`.
pub fn atom_transfer_duration(params: &NoiseParams) -> f64 {
    5.0 * PI / (2.0 * params.omega) + PI / (2.0 * params.omega_zz)
}

/// Duration of one bare-atom purification round (local slots plus
/// measurement, excluding message waits), `5π/(2Ω) + π/(4Ω_zz) + t_me`.
pub fn atom_purify_duration(params: &NoiseParams) -> f64 {
    5.0 * PI / (2.0 * params.omega) + PI / (4.0 * params.omega_zz) + params.t_me
}

fn cmz_aux_duration(params: &NoiseParams) -> f64 {
    params.tau
}

fn cmz_dfs_dfs_duration(params: &NoiseParams) -> f64 {
    2.0 * cmz_aux_duration(params) + 5.0 * PI / (4.0 * params.omega) + params.t_me
}

fn cnot_dfs_duration(params: &NoiseParams) -> f64 {
    cmz_dfs_dfs_duration(params) + 2.0 * dfs_hadamard_duration()
}

fn measure_dfs_duration(params: &NoiseParams) -> f64 {
    cmz_aux_duration(params) + PI / (2.0 * params.omega) + params.t_me
}

/// Duration of one encoded-register swap: logical CNOT, logical
/// Hadamard, and two sequential logical measurements (one auxiliary
/// atom per node).
pub fn dfs_swap_duration(params: &NoiseParams) -> f64 {
    cnot_dfs_duration(params) + dfs_hadamard_duration() + 2.0 * measure_dfs_duration(params)
}

/// Duration of teleporting a bare-atom pair onto encoded registers
/// (the register preparation happens off the critical path).
pub fn atom_to_dfs_transfer_duration(params: &NoiseParams) -> f64 {
    params.tau + PI / (4.0 * params.omega) + params.t_me
}

/// Duration of teleporting an encoded pair onto fresh encoded
/// registers.
pub fn dfs_to_dfs_transfer_duration(params: &NoiseParams) -> f64 {
    cmz_dfs_dfs_duration(params) + dfs_hadamard_duration() + measure_dfs_duration(params)
}

/// Duration of one encoded-pair purification round pumped by a fresh
/// bare-atom pair.
pub fn aux_dfs_purify_duration(params: &NoiseParams) -> f64 {
    let atom_pre = 3.0 * PI / (4.0 * params.omega) + 3.0 * PI / (4.0 * params.omega);
    DFS_X_ROTATION_TIME.max(atom_pre)
        + params.tau
        + 3.0 * PI / (4.0 * params.omega)
        + params.t_me
}

/// Duration of one encoded-pair purification round with an encoded
/// sacrificial pair.
pub fn dfs_dfs_purify_duration(params: &NoiseParams) -> f64 {
    DFS_X_ROTATION_TIME + cnot_dfs_duration(params) + measure_dfs_duration(params)
}

// ---------------------------------------------------------------------------
// Bare-atom Bell analyzer and feed-forward corrections.
// ---------------------------------------------------------------------------

/// Pushes the analyzer's local slots onto `pipe`:
/// CNOT(`c1`→`c2`) built from the controlled-Z resource, plus the
/// basis-change rotation on `c1`, leaving both ready for z-basis
/// measurement. `atom_idlers` dephase for every slot.
///
/// The slot widths are: `3π/(4Ω)` (target pre-rotation), the
/// interaction `π/(4Ω_zz)`, `3π/(4Ω)` (parallel local z rotations),
/// `3π/(4Ω)` (parallel `c1` basis change and `c2` post-rotation), and
/// finally `t_me` while both measured atoms idle.
fn push_atom_analyzer(
    pipe: &mut Pipeline,
    c1: usize,
    c2: usize,
    atom_idlers: &[usize],
    params: &NoiseParams,
) -> Result<()> {
    let (ry_back, t_back) = noisy_rotation(PauliAxis::Y, -FRAC_PI_2, params)?;
    let (ry_fwd, t_fwd) = noisy_rotation(PauliAxis::Y, FRAC_PI_2, params)?;
    let (rz_back, t_rz) = noisy_rotation(PauliAxis::Z, -FRAC_PI_2, params)?;
    let (ising, t_ising) = ising_gate(FRAC_PI_2, params)?;

    // Slot 1: CNOT pre-rotation on the target.
    pipe.push(&ry_back, &[c2])?;
    let mut slot1_idlers = vec![c1];
    slot1_idlers.extend_from_slice(atom_idlers);
    idle_each(pipe, params, t_back, &slot1_idlers)?;

    // Slot 2: the Ising interaction, then the two local z rotations
    // completing the controlled-Z.
    pipe.push(&ising, &[c1, c2])?;
    idle_each(pipe, params, t_ising, atom_idlers)?;
    pipe.push(&rz_back, &[c1])?;
    pipe.push(&rz_back, &[c2])?;
    idle_each(pipe, params, t_rz, atom_idlers)?;

    // Slot 3: basis change on c1, CNOT post-rotation on c2 (which
    // finishes early and idles out the slot).
    pipe.push(&ry_back, &[c1])?;
    pipe.push(&ry_fwd, &[c2])?;
    idle_each(pipe, params, t_back - t_fwd, &[c2])?;
    idle_each(pipe, params, t_back, atom_idlers)?;

    // Measurement window.
    let mut meas_idlers = vec![c1, c2];
    meas_idlers.extend_from_slice(atom_idlers);
    idle_each(pipe, params, params.t_me, &meas_idlers)?;
    Ok(())
}

/// Pushes the feed-forward Pauli correction for analyzer outcomes
/// `(m1, m2)` onto a bare atom, padded to a fixed slot per `m2` class
/// (`π/(2Ω)` when no bit flip is needed, `π/Ω` otherwise) so that
/// `atom_idlers` can dephase for the same window.
fn push_atom_correction(
    pipe: &mut Pipeline,
    target: usize,
    m1: u8,
    m2: u8,
    atom_idlers: &[usize],
    params: &NoiseParams,
) -> Result<()> {
    let (rx_pi, t_rx) = noisy_rotation(PauliAxis::X, PI, params)?;
    let (rz_pi, t_rz) = noisy_rotation(PauliAxis::Z, PI, params)?;
    let slot = if m2 == 1 { t_rx + t_rz } else { t_rz };
    let mut used = 0.0;
    if m2 == 1 {
        pipe.push(&rx_pi, &[target])?;
        used += t_rx;
    }
    if m1 == 1 {
        pipe.push(&rz_pi, &[target])?;
        used += t_rz;
    }
    idle_each(pipe, params, slot - used, &[target])?;
    idle_each(pipe, params, slot, atom_idlers)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Entanglement transfer.
// ---------------------------------------------------------------------------

/// Measurement-free transfer of a bare-atom pair onto fresh bare
/// atoms: two controlled-NOTs per node, with every rotation and
/// interaction slot explicit so all four atoms dephase for exactly
/// the block duration `5π/(2Ω) + π/(2Ω_zz)`.
pub fn transfer_atom_atom(state: &DensityMatrix, params: &NoiseParams) -> Result<BlockResult> {
    check_pair(state, "transfer input")?;
    params.validate()?;
    // Register: [source-left, source-right, fresh-left, fresh-right].
    let (ry_fwd, t_fwd) = noisy_rotation(PauliAxis::Y, FRAC_PI_2, params)?;
    let (ry_back, t_back) = noisy_rotation(PauliAxis::Y, -FRAC_PI_2, params)?;
    let (rz_fwd, t_rz_fwd) = noisy_rotation(PauliAxis::Z, FRAC_PI_2, params)?;
    let (rz_back, t_rz_back) = noisy_rotation(PauliAxis::Z, -FRAC_PI_2, params)?;
    let (ising, _) = ising_gate(FRAC_PI_2, params)?;

    let mut pipe = Pipeline::new(4);
    // Slot 1 (π/(4Ω)): fresh atoms get the CNOT pre-rotation; the
    // stray phase of this cheap variant is folded into the z slot.
    pipe.push(&ry_fwd, &[2])?;
    pipe.push(&ry_fwd, &[3])?;
    idle_each(&mut pipe, params, t_fwd, &[0, 1])?;
    // Slot 2: interaction + local z rotations completing a
    // controlled-Z with the stray phase absorbed on the source side
    // (π/2 instead of −π/2), so the source rotation is shorter and
    // idles out the 3π/(4Ω) z slot.
    pipe.push(&ising, &[0, 2])?;
    pipe.push(&ising, &[1, 3])?;
    pipe.push(&rz_fwd, &[0])?;
    pipe.push(&rz_fwd, &[1])?;
    idle_each(&mut pipe, params, t_rz_back - t_rz_fwd, &[0, 1])?;
    pipe.push(&rz_back, &[2])?;
    pipe.push(&rz_back, &[3])?;
    // Slot 3 (3π/(4Ω)): fresh atoms' post-rotation; source atoms do
    // the second CNOT's pre-rotation and idle the rest.
    pipe.push(&ry_back, &[2])?;
    pipe.push(&ry_back, &[3])?;
    pipe.push(&ry_fwd, &[0])?;
    pipe.push(&ry_fwd, &[1])?;
    idle_each(&mut pipe, params, t_back - t_fwd, &[0, 1])?;
    // Slot 4: second controlled-Z, stray phase now absorbed on the
    // fresh side; the source atoms' final post-rotation is dropped
    // because they are traced out.
    pipe.push(&ising, &[2, 0])?;
    pipe.push(&ising, &[3, 1])?;
    pipe.push(&rz_fwd, &[2])?;
    pipe.push(&rz_fwd, &[3])?;
    idle_each(&mut pipe, params, t_rz_back - t_rz_fwd, &[2, 3])?;
    pipe.push(&rz_back, &[0])?;
    pipe.push(&rz_back, &[1])?;

    let reference = DensityMatrix::zero_state(2);
    let (channel, _) = pipe.compress(&[0, 1], &[2, 3], &reference)?;
    finish_block(channel, state, atom_transfer_duration(params))
}

/// Teleports a bare-atom pair onto freshly prepared encoded
/// registers: per node, a controlled phase between the atom and the
/// register, one atom rotation, and an atom measurement whose outcome
/// selects an ideal logical correction.
pub fn transfer_atom_dfs(state: &DensityMatrix, params: &NoiseParams) -> Result<BlockResult> {
    check_pair(state, "transfer input")?;
    params.validate()?;
    // Register: [atom-left, atom-right, logical-left, logical-right].
    let (cmz, _) = controlled_minus_z_aux_dfs(params)?;
    let (ry_fwd, _) = noisy_rotation(PauliAxis::Y, FRAC_PI_2, params)?;
    let meas_idle = idle(params, params.t_me)?;
    let prep = Channel::from_unitary(&rot_x(-FRAC_PI_2))?;
    let fix0 = Channel::from_unitary(&(rot_z(FRAC_PI_2) * rot_x(FRAC_PI_2)))?;
    let fix1 = Channel::from_unitary(&(rot_z(-FRAC_PI_2) * rot_x(FRAC_PI_2)))?;

    let mut total: Option<Channel> = None;
    for m_left in 0..2u8 {
        for m_right in 0..2u8 {
            let mut pipe = Pipeline::new(4);
            for (atom, logical, m) in [(0usize, 2usize, m_left), (1, 3, m_right)] {
                pipe.push(&prep, &[logical])?;
                pipe.push(&cmz, &[atom, logical])?;
                pipe.push(&ry_fwd, &[atom])?;
                if params.gamma > 0.0 {
                    pipe.push(&meas_idle, &[atom])?;
                }
                pipe.push(&povm_measure(params.eta, m)?, &[atom])?;
                pipe.push(if m == 0 { &fix0 } else { &fix1 }, &[logical])?;
            }
            let (branch, _) = pipe.compress(&[0, 1], &[2, 3], &DensityMatrix::zero_state(2))?;
            total = Some(match total {
                None => branch,
                Some(ch) => ch.try_add(&branch)?,
            });
        }
    }
    finish_block(
        total.expect("branches always built"),
        state,
        atom_to_dfs_transfer_duration(params),
    )
}

/// Teleports an encoded pair onto fresh encoded registers: per node,
/// the destination register is prepared in `|+⟩`, a controlled phase
/// links source and destination, and an x-basis logical measurement
/// of the source selects the logical correction.
pub fn transfer_dfs_dfs(state: &DensityMatrix, params: &NoiseParams) -> Result<BlockResult> {
    check_pair(state, "transfer input")?;
    params.validate()?;
    // Register: [source-left, source-right, dest-left, dest-right].
    let (cmz_dd, _) = controlled_minus_z_dfs_dfs(params)?;
    let h = Channel::from_unitary(&hadamard())?;
    let z = Channel::from_unitary(&pauli_z())?;

    let mut total: Option<Channel> = None;
    for m_left in 0..2u8 {
        for m_right in 0..2u8 {
            let mut pipe = Pipeline::new(4);
            for (src, dst, m) in [(0usize, 2usize, m_left), (1, 3, m_right)] {
                pipe.push(&h, &[dst])?;
                pipe.push(&z, &[src])?;
                pipe.push(&cmz_dd, &[src, dst])?;
                pipe.push(&h, &[src])?;
                let (meas, _) = measure_dfs(params, m)?;
                pipe.push(&meas, &[src])?;
                pipe.push(&h, &[dst])?;
                if m == 1 {
                    pipe.push(&z, &[dst])?;
                }
            }
            let (branch, _) = pipe.compress(&[0, 1], &[2, 3], &DensityMatrix::zero_state(2))?;
            total = Some(match total {
                None => branch,
                Some(ch) => ch.try_add(&branch)?,
            });
        }
    }
    finish_block(
        total.expect("branches always built"),
        state,
        dfs_to_dfs_transfer_duration(params),
    )
}

// ---------------------------------------------------------------------------
// Entanglement swapping.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
enum MergeSide {
    /// The incoming pair extends the held pair to the left.
    Left,
    /// The incoming pair extends the held pair to the right.
    Right,
}

/// One swap merge: Bell-measures the junction qubits of the held and
/// incoming pairs and feed-forward-corrects the incoming pair's outer
/// qubit, which becomes the new end.
///
/// `pre_wait` is how long the incoming pair has already been stored
/// (bare atoms dephase for it); `far_end_wait` adds the analyzer,
/// message, and correction windows to the held pair's far end (used
/// when that end is not simultaneously engaged in another merge).
fn merge(
    kind: RepeaterKind,
    held: &DensityMatrix,
    incoming: &DensityMatrix,
    side: MergeSide,
    pre_wait: f64,
    far_end_wait: bool,
    s_prev: f64,
    params: &NoiseParams,
) -> Result<(Channel, DensityMatrix)> {
    check_pair(held, "held pair")?;
    check_pair(incoming, "incoming pair")?;
    // Register layouts (geographic order):
    //   Right merge: [held-L, held-R, inc-inner, inc-outer]
    //   Left merge:  [inc-outer, inc-inner, held-L, held-R]
    let (input, keep, c1, c2, target, far, inc_qubits): (
        [usize; 2],
        [usize; 2],
        usize,
        usize,
        usize,
        usize,
        [usize; 2],
    ) = match side {
        MergeSide::Right => ([0, 1], [0, 3], 1, 2, 3, 0, [2, 3]),
        MergeSide::Left => ([2, 3], [0, 3], 2, 1, 0, 3, [0, 1]),
    };
    let t_w = s_prev / params.c;
    let dfs_gadgets = match kind {
        RepeaterKind::Atom => None,
        RepeaterKind::Dfs => {
            let (cnot, _) = cnot_dfs(params)?;
            let (meas0, _) = measure_dfs(params, 0)?;
            let (meas1, _) = measure_dfs(params, 1)?;
            Some((cnot, [meas0, meas1]))
        }
    };

    let mut total: Option<Channel> = None;
    for m1 in 0..2u8 {
        for m2 in 0..2u8 {
            let mut pipe = Pipeline::new(4);
            let mut idlers = vec![target];
            if far_end_wait {
                idlers.push(far);
            }
            match &dfs_gadgets {
                None => {
                    idle_each(&mut pipe, params, pre_wait, &inc_qubits)?;
                    push_atom_analyzer(&mut pipe, c1, c2, &idlers, params)?;
                    pipe.push(&povm_measure(params.eta, m1)?, &[c1])?;
                    pipe.push(&povm_measure(params.eta, m2)?, &[c2])?;
                    idle_each(&mut pipe, params, t_w, &idlers)?;
                    let corr_idlers: Vec<usize> =
                        idlers.iter().copied().filter(|&q| q != target).collect();
                    push_atom_correction(&mut pipe, target, m1, m2, &corr_idlers, params)?;
                }
                Some((cnot, meas)) => {
                    let h = Channel::from_unitary(&hadamard())?;
                    pipe.push(cnot, &[c1, c2])?;
                    pipe.push(&h, &[c1])?;
                    pipe.push(&meas[m1 as usize], &[c1])?;
                    pipe.push(&meas[m2 as usize], &[c2])?;
                    if m2 == 1 {
                        pipe.push(&Channel::from_unitary(&pauli_x())?, &[target])?;
                    }
                    if m1 == 1 {
                        pipe.push(&Channel::from_unitary(&pauli_z())?, &[target])?;
                    }
                }
            }
            let (branch, _) = pipe.compress(&input, &keep, incoming)?;
            total = Some(match total {
                None => branch,
                Some(ch) => ch.try_add(&branch)?,
            });
        }
    }
    let channel = total.expect("branches always built");
    let out = channel.apply(held)?.normalized()?;
    Ok((channel, out))
}

/// Connects two pairs `(A–C)` and `(C–B)` at their shared middle node
/// into one `(A–B)` pair: Bell analyzer at the middle, classical
/// message to `B`'s node (`s_prev/c`), feed-forward correction on
/// `B`; `A` idles throughout.
pub fn swap_once(
    kind: RepeaterKind,
    pair1: &DensityMatrix,
    pair2: &DensityMatrix,
    s_prev: f64,
    params: &NoiseParams,
) -> Result<BlockResult> {
    params.validate()?;
    let (channel, state) = merge(
        kind,
        pair1,
        pair2,
        MergeSide::Right,
        0.0,
        true,
        s_prev,
        params,
    )?;
    let t_block = match kind {
        RepeaterKind::Atom => atom_swap_duration(params),
        RepeaterKind::Dfs => dfs_swap_duration(params),
    };
    Ok(BlockResult {
        channel,
        state,
        success_probability: 1.0,
        duration: t_block + s_prev / params.c,
    })
}

/// Connects `l + 1` identical pairs of span `s_prev` into one long
/// pair using `l` simultaneous merges scheduled from the center
/// outwards: round `d` attaches the pairs `d` steps left and right of
/// the center pair, so the whole chain takes `⌈l/2⌉` rounds of
/// `(swap duration + s_prev/c)` each. Pairs idle (and bare atoms
/// dephase) until their round arrives.
pub fn swap_chain(
    kind: RepeaterKind,
    l: usize,
    pair: &DensityMatrix,
    s_prev: f64,
    params: &NoiseParams,
) -> Result<BlockResult> {
    check_pair(pair, "chain input")?;
    params.validate()?;
    let t_block = match kind {
        RepeaterKind::Atom => atom_swap_duration(params),
        RepeaterKind::Dfs => dfs_swap_duration(params),
    };
    let period = t_block + s_prev / params.c;
    if l == 0 {
        return Ok(BlockResult {
            channel: Channel::identity(4),
            state: pair.clone(),
            success_probability: 1.0,
            duration: 0.0,
        });
    }
    // Pairs are numbered 1..=l+1; the center pair is ⌈(l+1)/2⌉.
    let center = (l + 2) / 2;
    let rounds = l.div_ceil(2);
    let mut held = pair.clone();
    let mut channel = Channel::identity(4);
    for d in 1..=rounds {
        let left_exists = center > d;
        let right_exists = center + d <= l + 1;
        let pre_wait = (d - 1) as f64 * period;
        if left_exists {
            let (ch, out) = merge(
                kind,
                &held,
                pair,
                MergeSide::Left,
                pre_wait,
                !right_exists,
                s_prev,
                params,
            )?;
            channel = compose(&ch, &channel)?;
            held = out;
        }
        if right_exists {
            let (ch, out) = merge(
                kind,
                &held,
                pair,
                MergeSide::Right,
                pre_wait,
                !left_exists,
                s_prev,
                params,
            )?;
            channel = compose(&ch, &channel)?;
            held = out;
        }
    }
    Ok(BlockResult {
        channel,
        state: held,
        success_probability: 1.0,
        duration: rounds as f64 * period,
    })
}

// ---------------------------------------------------------------------------
// Entanglement purification.
// ---------------------------------------------------------------------------

/// One recurrence-style purification round: both pairs are rotated
/// (`+π/2` about x on the left node, `−π/2` on the right), a CNOT
/// from kept to sacrificed runs at each node, the sacrificed pair is
/// measured, and the round post-selects coincident outcomes. The
/// returned channel is trace non-increasing; the success probability
/// reflects the actual input states.
///
/// `s_n` is the span of the pairs: the kept atoms (bare-atom kind
/// only) dephase for the outcome-message flight `s_n/c`, with the
/// left node additionally idling out its head start.
pub fn purify_step(
    kind: PurifyPairKind,
    kept: &DensityMatrix,
    sacrificed: &DensityMatrix,
    s_n: f64,
    params: &NoiseParams,
) -> Result<BlockResult> {
    check_pair(kept, "kept pair")?;
    check_pair(sacrificed, "sacrificed pair")?;
    params.validate()?;
    match kind {
        PurifyPairKind::AtomAtom => purify_atom_atom(kept, sacrificed, s_n, params),
        PurifyPairKind::AuxDfs => purify_aux_dfs(kept, sacrificed, params),
        PurifyPairKind::DfsDfs => purify_dfs_dfs(kept, sacrificed, params),
    }
}

fn purify_atom_atom(
    kept: &DensityMatrix,
    sacrificed: &DensityMatrix,
    s_n: f64,
    params: &NoiseParams,
) -> Result<BlockResult> {
    // Register: [kept-L, kept-R, sac-L, sac-R].
    let (rx_fwd, t_rx_fwd) = noisy_rotation(PauliAxis::X, FRAC_PI_2, params)?;
    let (rx_back, t_rx_back) = noisy_rotation(PauliAxis::X, -FRAC_PI_2, params)?;
    let (ry_fwd, t_ry_fwd) = noisy_rotation(PauliAxis::Y, FRAC_PI_2, params)?;
    let (ry_back, t_ry_back) = noisy_rotation(PauliAxis::Y, -FRAC_PI_2, params)?;
    let (rz_back, _) = noisy_rotation(PauliAxis::Z, -FRAC_PI_2, params)?;
    let (ising, _) = ising_gate(FRAC_PI_2, params)?;
    let t_w = s_n / params.c;
    let head_start = t_rx_back - t_rx_fwd;

    let mut total: Option<Channel> = None;
    for m in 0..2u8 {
        let mut pipe = Pipeline::new(4);
        // Recurrence rotations on every qubit, per node.
        pipe.push(&rx_fwd, &[0])?;
        pipe.push(&rx_fwd, &[2])?;
        pipe.push(&rx_back, &[1])?;
        pipe.push(&rx_back, &[3])?;
        // CNOT kept→sacrificed at each node: pre-rotation on the
        // sacrificed qubit while the kept qubit idles...
        pipe.push(&ry_back, &[2])?;
        pipe.push(&ry_back, &[3])?;
        idle_each(&mut pipe, params, t_ry_back, &[0, 1])?;
        // ...the controlled-Z (interaction plus z rotations on both
        // participants)...
        pipe.push(&ising, &[0, 2])?;
        pipe.push(&ising, &[1, 3])?;
        pipe.push(&rz_back, &[0])?;
        pipe.push(&rz_back, &[1])?;
        pipe.push(&rz_back, &[2])?;
        pipe.push(&rz_back, &[3])?;
        // ...and the post-rotation on the sacrificed qubit.
        pipe.push(&ry_fwd, &[2])?;
        pipe.push(&ry_fwd, &[3])?;
        idle_each(&mut pipe, params, t_ry_fwd, &[0, 1])?;
        // Measurement window for the sacrificed pair; kept idles.
        idle_each(&mut pipe, params, params.t_me, &[0, 1, 2, 3])?;
        // Coincident outcomes (m, m) are kept.
        pipe.push(&povm_measure(params.eta, m)?, &[2])?;
        pipe.push(&povm_measure(params.eta, m)?, &[3])?;
        // Outcome messages cross the span; the left node also idles
        // out the head start from its shorter recurrence rotation.
        idle_each(&mut pipe, params, t_w + head_start, &[0])?;
        idle_each(&mut pipe, params, t_w, &[1])?;
        let (branch, _) = pipe.compress(&[0, 1], &[0, 1], sacrificed)?;
        total = Some(match total {
            None => branch,
            Some(ch) => ch.try_add(&branch)?,
        });
    }
    finish_block(
        total.expect("branches always built"),
        kept,
        atom_purify_duration(params),
    )
}

fn purify_aux_dfs(
    kept: &DensityMatrix,
    sacrificed: &DensityMatrix,
    params: &NoiseParams,
) -> Result<BlockResult> {
    // Register: [kept-L, kept-R, atom-L, atom-R]; the kept pair is
    // encoded (no idle dephasing), the sacrificial pair is bare.
    let (cmz, _) = controlled_minus_z_aux_dfs(params)?;
    let ideal_rx_fwd = Channel::from_unitary(&rot_x(FRAC_PI_2))?;
    let ideal_rx_back = Channel::from_unitary(&rot_x(-FRAC_PI_2))?;
    let (rx_fwd, _) = noisy_rotation(PauliAxis::X, FRAC_PI_2, params)?;
    let (rx_back, _) = noisy_rotation(PauliAxis::X, -FRAC_PI_2, params)?;
    let (ry_back, _) = noisy_rotation(PauliAxis::Y, -FRAC_PI_2, params)?;
    let (ry_fwd, _) = noisy_rotation(PauliAxis::Y, FRAC_PI_2, params)?;
    let (rz_pi, _) = noisy_rotation(PauliAxis::Z, PI, params)?;
    let meas_idle = idle(params, params.t_me)?;

    let mut total: Option<Channel> = None;
    for m in 0..2u8 {
        let mut pipe = Pipeline::new(4);
        // Recurrence rotations: ideal on the encoded kept pair,
        // noisy on the bare sacrificial atoms.
        pipe.push(&ideal_rx_fwd, &[0])?;
        pipe.push(&ideal_rx_back, &[1])?;
        pipe.push(&rx_fwd, &[2])?;
        pipe.push(&rx_back, &[3])?;
        // CNOT with the encoded qubit as control and the atom as
        // target, per node: atom basis rotation, controlled phase,
        // then the atom's z and y rotations absorbing the stray
        // phase of the primitive.
        for (logical, atom) in [(0usize, 2usize), (1, 3)] {
            pipe.push(&ry_back, &[atom])?;
            pipe.push(&cmz, &[atom, logical])?;
            pipe.push(&rz_pi, &[atom])?;
            pipe.push(&ry_fwd, &[atom])?;
        }
        if params.gamma > 0.0 {
            pipe.push(&meas_idle, &[2])?;
            pipe.push(&meas_idle, &[3])?;
        }
        pipe.push(&povm_measure(params.eta, m)?, &[2])?;
        pipe.push(&povm_measure(params.eta, m)?, &[3])?;
        let (branch, _) = pipe.compress(&[0, 1], &[0, 1], sacrificed)?;
        total = Some(match total {
            None => branch,
            Some(ch) => ch.try_add(&branch)?,
        });
    }
    finish_block(
        total.expect("branches always built"),
        kept,
        aux_dfs_purify_duration(params),
    )
}

fn purify_dfs_dfs(
    kept: &DensityMatrix,
    sacrificed: &DensityMatrix,
    params: &NoiseParams,
) -> Result<BlockResult> {
    // Register: [kept-L, kept-R, sac-L, sac-R], all encoded.
    let ideal_rx_fwd = Channel::from_unitary(&rot_x(FRAC_PI_2))?;
    let ideal_rx_back = Channel::from_unitary(&rot_x(-FRAC_PI_2))?;
    let (cnot, _) = cnot_dfs(params)?;

    let mut total: Option<Channel> = None;
    for m in 0..2u8 {
        let mut pipe = Pipeline::new(4);
        pipe.push(&ideal_rx_fwd, &[0])?;
        pipe.push(&ideal_rx_fwd, &[2])?;
        pipe.push(&ideal_rx_back, &[1])?;
        pipe.push(&ideal_rx_back, &[3])?;
        pipe.push(&cnot, &[0, 2])?;
        pipe.push(&cnot, &[1, 3])?;
        let (meas, _) = measure_dfs(params, m)?;
        pipe.push(&meas, &[2])?;
        pipe.push(&meas, &[3])?;
        let (branch, _) = pipe.compress(&[0, 1], &[0, 1], sacrificed)?;
        total = Some(match total {
            None => branch,
            Some(ch) => ch.try_add(&branch)?,
        });
    }
    finish_block(
        total.expect("branches always built"),
        kept,
        dfs_dfs_purify_duration(params),
    )
}

// ---------------------------------------------------------------------------
// Entanglement pumping to the fixed point.
// ---------------------------------------------------------------------------

/// How a pumping iteration terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PumpOutcome {
    /// Successive fidelities converged (|Δf| below the tolerance).
    Converged,
    /// The fidelity settled into a period-two oscillation.
    Oscillating,
    /// The iteration cap was reached without convergence.
    MaxIterations,
}

/// Result of pumping a pair to its fidelity fixed point.
#[derive(Debug, Clone)]
pub struct PumpReport {
    /// The limiting (or best oscillating) fidelity.
    pub f_max: f64,
    /// Purification rounds performed.
    pub steps: usize,
    /// How the iteration terminated.
    pub outcome: PumpOutcome,
    /// Whether pumping beat the initial fidelity.
    pub improved: bool,
    /// The final kept state.
    pub state: DensityMatrix,
}

/// Convergence tolerance for the pumping fixed point.
const PUMP_TOL: f64 = 1e-10;
/// Iteration cap for the pumping fixed point.
const PUMP_MAX_ITERS: usize = 200;

/// Repeatedly purifies `initial` with fresh copies of `pump`,
/// tracking the fidelity after each round until it converges, locks
/// into an oscillation, or hits the iteration cap.
///
/// Between rounds the kept pair waits for the next pump pair to be
/// ready: bare-atom kept pairs dephase for
/// `max(0, pump_build_time − s_n/c)` on top of the message wait
/// `s_n/c` already included in each purification round.
///
/// The fixed rotation convention makes the dominant error type cycle
/// with period three (a phase flip becomes a bit-phase flip, then a
/// phase flip again), producing one genuinely progress-free round per
/// cycle, so convergence requires the fidelity to be stable across a
/// three-round window rather than a single step.
pub fn pump_to_fixed_point(
    kind: PurifyPairKind,
    initial: &DensityMatrix,
    pump: &DensityMatrix,
    s_n: f64,
    pump_build_time: f64,
    params: &NoiseParams,
) -> Result<PumpReport> {
    check_pair(initial, "initial pair")?;
    check_pair(pump, "pump pair")?;
    params.validate()?;
    let extra_wait = (pump_build_time - s_n / params.c).max(0.0);
    let wait_channel = if kind == PurifyPairKind::AtomAtom && extra_wait > 0.0 {
        let one = idle(params, extra_wait)?;
        Some(one.tensor(&idle(params, extra_wait)?))
    } else {
        None
    };
    // The purification round is a fixed channel on the kept pair (the
    // pump state is baked in), so build it once and iterate.
    let round = purify_step(kind, initial, pump, s_n, params)?;
    let f0 = crate::states::entanglement_fidelity(initial)?;
    let mut state = initial.clone();
    let mut history: Vec<f64> = vec![f0];
    let mut outcome = PumpOutcome::MaxIterations;
    let mut steps = 0;
    for k in 1..=PUMP_MAX_ITERS {
        if let Some(w) = &wait_channel {
            state = w.apply(&state)?.normalized()?;
        }
        state = round.channel.apply(&state)?.normalized()?;
        let f = crate::states::entanglement_fidelity(&state)?;
        history.push(f);
        steps = k;
        let window_stable = k >= 3
            && (f - history[k - 1]).abs() < PUMP_TOL
            && (f - history[k - 2]).abs() < PUMP_TOL
            && (f - history[k - 3]).abs() < PUMP_TOL;
        if window_stable {
            outcome = PumpOutcome::Converged;
            break;
        }
        let period_two = k >= 3
            && (f - history[k - 2]).abs() < PUMP_TOL
            && (history[k - 1] - history[k - 3]).abs() < PUMP_TOL
            && (f - history[k - 1]).abs() >= PUMP_TOL;
        if period_two {
            outcome = PumpOutcome::Oscillating;
            break;
        }
    }
    let f_max = match outcome {
        PumpOutcome::Converged => *history.last().expect("non-empty"),
        // For a limit cycle the operational figure of merit is the
        // best fidelity the cycle visits.
        PumpOutcome::Oscillating | PumpOutcome::MaxIterations => history
            .iter()
            .skip(1)
            .copied()
            .fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(PumpReport {
        f_max,
        steps,
        outcome,
        improved: f_max > f0 + 1e-12,
        state,
    })
}
