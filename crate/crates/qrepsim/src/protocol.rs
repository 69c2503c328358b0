//! The nested repeater protocol: spans, the lower-bound timing model,
//! and the level-by-level density-matrix evolution combining swap
//! chains, transfers to holding qubits, and entanglement pumping.

use crate::blocks::{
    atom_purify_duration, atom_swap_duration, atom_to_dfs_transfer_duration,
    atom_transfer_duration, aux_dfs_purify_duration, dfs_dfs_purify_duration, dfs_swap_duration,
    dfs_to_dfs_transfer_duration, purify_step, swap_chain, transfer_atom_atom, transfer_atom_dfs,
    transfer_dfs_dfs, PurifyPairKind, RepeaterKind,
};
use crate::noise::{idle, NoiseParams};
use crate::states::{entanglement_fidelity, state_distance, BellState, DensityMatrix, PairFamily};
use crate::{Error, Result};

/// Full description of a nested repeater run.
#[derive(Debug, Clone)]
pub struct RepeaterConfig {
    /// Hardware family above the elementary level.
    pub kind: RepeaterKind,
    /// Error family of the elementary pairs.
    pub family: PairFamily,
    /// Elementary pair fidelity at generation.
    pub f0: f64,
    /// Number of nesting levels.
    pub levels: usize,
    /// Swap-chain merge count per level (`connections[i]` is level
    /// `i + 1`).
    pub connections: Vec<usize>,
    /// Pumping rounds per level (`pump_rounds[i]` is level `i + 1`).
    pub pump_rounds: Vec<usize>,
    /// Hardware noise and timing parameters.
    pub params: NoiseParams,
}

impl Default for RepeaterConfig {
    fn default() -> Self {
        let levels = 12;
        let mut connections = vec![1usize; levels];
        connections[0] = 0;
        RepeaterConfig {
            kind: RepeaterKind::Dfs,
            family: PairFamily::Werner,
            f0: 0.9,
            levels,
            connections,
            pump_rounds: vec![5; levels],
            params: NoiseParams::default(),
        }
    }
}

impl RepeaterConfig {
    /// Validates lengths and parameter ranges.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.levels == 0 {
            return Err(Error::InvalidParameter(
                "a repeater needs at least one level".into(),
            ));
        }
        if self.connections.len() != self.levels {
            return Err(Error::InvalidParameter(format!(
                "expected {} per-level connection counts, got {}",
                self.levels,
                self.connections.len()
            )));
        }
        if self.pump_rounds.len() != self.levels {
            return Err(Error::InvalidParameter(format!(
                "expected {} per-level pump-round counts, got {}",
                self.levels,
                self.pump_rounds.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.f0) {
            return Err(Error::InvalidParameter(format!(
                "initial fidelity {} outside [0, 1]",
                self.f0
            )));
        }
        Ok(())
    }

    /// Pair spans `S_0..S_levels` in meters: each level multiplies the
    /// span by its number of chained segments.
    pub fn spans(&self) -> Vec<f64> {
        let mut spans = Vec::with_capacity(self.levels + 1);
        let mut s = self.params.l0;
        spans.push(s);
        for &l in &self.connections {
            s *= (l + 1) as f64;
            spans.push(s);
        }
        spans
    }

    fn swap_duration_at(&self, level: usize) -> f64 {
        match self.kind {
            RepeaterKind::Atom => atom_swap_duration(&self.params),
            // Level 1 chains elementary bare-atom pairs even in the
            // encoded repeater.
            RepeaterKind::Dfs if level == 1 => atom_swap_duration(&self.params),
            RepeaterKind::Dfs => dfs_swap_duration(&self.params),
        }
    }

    fn transfer_duration_at(&self, level: usize) -> f64 {
        match self.kind {
            RepeaterKind::Atom => atom_transfer_duration(&self.params),
            RepeaterKind::Dfs if level == 1 => atom_to_dfs_transfer_duration(&self.params),
            RepeaterKind::Dfs => dfs_to_dfs_transfer_duration(&self.params),
        }
    }

    fn purify_duration_at(&self, level: usize) -> f64 {
        match self.kind {
            RepeaterKind::Atom => atom_purify_duration(&self.params),
            RepeaterKind::Dfs if level == 1 => aux_dfs_purify_duration(&self.params),
            RepeaterKind::Dfs => dfs_dfs_purify_duration(&self.params),
        }
    }

    fn purify_kind_at(&self, level: usize) -> PurifyPairKind {
        match self.kind {
            RepeaterKind::Atom => PurifyPairKind::AtomAtom,
            RepeaterKind::Dfs if level == 1 => PurifyPairKind::AuxDfs,
            RepeaterKind::Dfs => PurifyPairKind::DfsDfs,
        }
    }
}

/// The lower-bound timing model of a repeater run.
#[derive(Debug, Clone)]
pub struct TimingReport {
    /// Pair spans `S_0..S_n` in meters.
    pub spans: Vec<f64>,
    /// Time to the first chained level-1 pair: generation plus the
    /// level-1 chain rounds.
    pub t0_prime: f64,
    /// `t_n` for levels `1..=n`: minimum time to the first finished
    /// pair of each level.
    pub level_min_times: Vec<f64>,
    /// First-pump build time per level (the wait before the first
    /// pumping round).
    pub pump_first_waits: Vec<f64>,
    /// Between-round pump wait per level (the build time minus the
    /// overlapped message flight, clipped at zero).
    pub pump_between_waits: Vec<f64>,
}

/// Computes the timing model for `config` without simulating states.
pub fn timing(config: &RepeaterConfig) -> Result<TimingReport> {
    config.validate()?;
    let p = &config.params;
    let spans = config.spans();
    let chain_rounds_1 = config.connections[0].div_ceil(2) as f64;
    let t0_prime = p.t0 + chain_rounds_1 * (config.swap_duration_at(1) + spans[0] / p.c);

    // Level 1: transfer, first pump build, then each pumping round
    // costs the round itself plus the longer of the next pump build
    // and the outcome-message flight.
    let k1 = config.pump_rounds[0] as f64;
    let t1 = config.transfer_duration_at(1)
        + t0_prime
        + k1 * (config.purify_duration_at(1) + t0_prime.max(spans[1] / p.c));
    let mut level_min_times = vec![t1];
    for n in 2..=config.levels {
        let prev = level_min_times[n - 2];
        level_min_times.push(prev * (config.pump_rounds[n - 1] + 1) as f64);
    }

    // Pump build times: the chain rounds at this level plus the
    // marginal time to regenerate one pair of the level below in the
    // pipelined schedule.
    let mut pump_first_waits = Vec::with_capacity(config.levels);
    let mut pump_between_waits = Vec::with_capacity(config.levels);
    for n in 1..=config.levels {
        let carryover = if n == 1 {
            p.t0
        } else {
            let below: f64 = level_min_times[..n - 2].iter().sum();
            (level_min_times[n - 2] - below).max(0.0)
        };
        let chain_rounds = config.connections[n - 1].div_ceil(2) as f64;
        let build = chain_rounds * (config.swap_duration_at(n) + spans[n - 1] / p.c) + carryover;
        pump_first_waits.push(build);
        pump_between_waits.push((build - spans[n] / p.c).max(0.0));
    }

    Ok(TimingReport {
        spans,
        t0_prime,
        level_min_times,
        pump_first_waits,
        pump_between_waits,
    })
}

/// Per-level outcome of a repeater run.
#[derive(Debug, Clone)]
pub struct LevelReport {
    /// Nesting level (0 is the elementary pair).
    pub level: usize,
    /// Pair span in meters.
    pub span: f64,
    /// Entanglement fidelity of the finished pair at this level.
    pub fidelity: f64,
    /// Max-abs distance of the finished pair from the target Bell
    /// state.
    pub bell_distance: f64,
    /// Minimum time to the first finished pair at this level.
    pub min_time: f64,
    /// Probability that every pumping round at this level accepted.
    pub success_probability: f64,
}

/// Result of a full repeater run.
#[derive(Debug, Clone)]
pub struct RepeaterRun {
    /// One report per level, starting at the elementary level 0.
    pub levels: Vec<LevelReport>,
    /// The finished top-level pair.
    pub final_state: DensityMatrix,
    /// The timing model used for the waits.
    pub timing: TimingReport,
}

fn report_for(
    level: usize,
    span: f64,
    min_time: f64,
    success_probability: f64,
    state: &DensityMatrix,
) -> Result<LevelReport> {
    Ok(LevelReport {
        level,
        span,
        fidelity: entanglement_fidelity(state)?,
        bell_distance: state_distance(state, &BellState::PhiPlus.density()),
        min_time,
        success_probability,
    })
}

/// Runs the nested protocol level by level: chain the pairs of the
/// level below, teleport the chained pair onto holding qubits, then
/// pump it with fresh chained pairs. Bare-atom holding qubits dephase
/// for every pump-build wait; encoded ones do not.
pub fn run_repeater(config: &RepeaterConfig) -> Result<RepeaterRun> {
    config.validate()?;
    let report = timing(config)?;
    let p = &config.params;

    // Elementary pair: generated at f0, both halves dephasing for the
    // generation time.
    let mut pair = config.family.state(config.f0)?;
    if p.gamma > 0.0 && p.t0 > 0.0 {
        let gen_idle = idle(p, p.t0)?;
        let both = gen_idle.tensor(&gen_idle);
        pair = both.apply(&pair)?.normalized()?;
    }
    let mut levels = Vec::with_capacity(config.levels + 1);
    levels.push(report_for(0, report.spans[0], p.t0, 1.0, &pair)?);

    for n in 1..=config.levels {
        let l_n = config.connections[n - 1];
        let k_n = config.pump_rounds[n - 1];
        let chain_kind = match config.kind {
            RepeaterKind::Atom => RepeaterKind::Atom,
            RepeaterKind::Dfs if n == 1 => RepeaterKind::Atom,
            RepeaterKind::Dfs => RepeaterKind::Dfs,
        };
        let chain = swap_chain(chain_kind, l_n, &pair, report.spans[n - 1], p)?;
        let pump = chain.state.clone();
        let transferred = match (config.kind, n) {
            (RepeaterKind::Atom, _) => transfer_atom_atom(&chain.state, p)?,
            (RepeaterKind::Dfs, 1) => transfer_atom_dfs(&chain.state, p)?,
            (RepeaterKind::Dfs, _) => transfer_dfs_dfs(&chain.state, p)?,
        };
        let mut held = transferred.state;
        let mut success = 1.0;
        if k_n > 0 {
            let purify_kind = config.purify_kind_at(n);
            let first_wait = report.pump_first_waits[n - 1];
            let between_wait = report.pump_between_waits[n - 1];
            for round in 0..k_n {
                let wait = if round == 0 { first_wait } else { between_wait };
                if config.kind == RepeaterKind::Atom && p.gamma > 0.0 && wait > 0.0 {
                    let w = idle(p, wait)?;
                    let both = w.tensor(&w);
                    held = both.apply(&held)?.normalized()?;
                }
                let step = purify_step(purify_kind, &held, &pump, report.spans[n], p)?;
                held = step.state;
                success *= step.success_probability;
            }
        }
        pair = held;
        levels.push(report_for(
            n,
            report.spans[n],
            report.level_min_times[n - 1],
            success,
            &pair,
        )?);
    }

    Ok(RepeaterRun {
        levels,
        final_state: pair,
        timing: report,
    })
}
