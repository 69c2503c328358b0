//! Plain-text run descriptions.
//!
//! A run description is UTF-8 `key=value` text: one key per line,
//! blank lines ignored, `#` starts a comment (full-line or trailing).
//! Keys (all optional except `command`):
//!
//! | key            | meaning                                        |
//! |----------------|------------------------------------------------|
//! | `command`      | `TRANSFER`, `SWAP`, `PURIFY`, `REPEATER`, `TIMING` |
//! | `kind`         | qubit technology, `ATOM` or `DFS`              |
//! | `family`       | pair family, `WERNER` or `BINARY`              |
//! | `f0`           | elementary-pair fidelity                       |
//! | `gamma`        | dephasing rate (1/s)                           |
//! | `eta`          | measurement correctness probability            |
//! | `omega`        | Rabi frequency Ω (rad/s)                       |
//! | `omega_zz`     | Ising strength Ω_zz (rad/s)                    |
//! | `tau`          | atom–encoded-qubit controlled-gate time (s)    |
//! | `t_me`         | measurement duration (s)                       |
//! | `t0`           | elementary-pair generation time (s)            |
//! | `c`            | classical signal speed (m/s)                   |
//! | `l0`           | elementary link length (m)                     |
//! | `levels`       | nesting depth <em>n</em>                       |
//! | `L`            | per-level connection counts, comma-separated   |
//! | `K`            | per-level pumping rounds, comma-separated      |
//! | `sweep_key`    | numeric parameter to sweep (or `L` for `SWAP`) |
//! | `sweep_values` | comma-separated sweep values, row order        |
//! | `out`          | output path (default: stdout)                  |
//!
//! Unset keys fall back to the documented defaults of
//! [`RepeaterConfig::default`]. Setting `levels` without `L`/`K`
//! regenerates their default lists at the new length; explicit `L`/`K`
//! lists must match `levels` exactly. All parse failures carry the
//! 1-based line number of the offending line.

use crate::blocks::RepeaterKind;
use crate::protocol::RepeaterConfig;
use crate::states::PairFamily;
use crate::{Error, Result};

/// The experiment family a run description executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// One state-transfer block of each variety on a fresh pair;
    /// reports the transferred fidelities.
    Transfer,
    /// A simultaneous swapping chain connecting `L+1` fresh pairs.
    Swap,
    /// Entanglement pumping to its fixed point, for all three pair
    /// technologies side by side.
    Purify,
    /// The full nested repeater, one row per nesting level.
    Repeater,
    /// The waiting-time model only (no state evolution).
    Timing,
}

impl Command {
    fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TRANSFER" => Some(Self::Transfer),
            "SWAP" => Some(Self::Swap),
            "PURIFY" => Some(Self::Purify),
            "REPEATER" => Some(Self::Repeater),
            "TIMING" => Some(Self::Timing),
            _ => None,
        }
    }
}

/// The parameter a sweep varies.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepKey {
    /// Elementary-pair fidelity `f0`.
    F0,
    /// A field of [`crate::noise::NoiseParams`], stored by key name.
    Param(&'static str),
    /// Connection count (integer), honoured by `SWAP` only.
    Connections,
}

impl SweepKey {
    /// The key name as written in run descriptions (and as the CSV
    /// sweep-column header).
    pub fn name(&self) -> &'static str {
        match self {
            SweepKey::F0 => "f0",
            SweepKey::Param(name) => name,
            SweepKey::Connections => "L",
        }
    }
}

/// A fully resolved run description.
#[derive(Debug, Clone)]
pub struct RunSpec {
    /// Which experiment to run.
    pub command: Command,
    /// Base configuration each sweep point starts from.
    pub config: RepeaterConfig,
    /// Swept parameter, if any.
    pub sweep_key: Option<SweepKey>,
    /// Sweep values in output row order (empty ⇒ header-only output
    /// when a sweep key is present).
    pub sweep_values: Vec<f64>,
    /// Output path; `None` writes to stdout.
    pub out: Option<String>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| err(line, format!("malformed number for `{key}`: `{value}`")))?;
    if !v.is_finite() {
        return Err(err(line, format!("non-finite value for `{key}`: `{value}`")));
    }
    Ok(v)
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| err(line, format!("malformed integer for `{key}`: `{value}`")))
}

fn parse_usize_list(line: usize, key: &str, value: &str) -> Result<Vec<usize>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|item| parse_usize(line, key, item.trim()))
        .collect()
}

fn parse_f64_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|item| parse_f64(line, key, item.trim()))
        .collect()
}

const SWEEPABLE_PARAMS: [&str; 9] = [
    "gamma", "eta", "omega", "omega_zz", "tau", "t_me", "t0", "c", "l0",
];

/// Applies one sweep value to a configuration clone.
pub fn apply_sweep(config: &mut RepeaterConfig, key: &SweepKey, value: f64) -> Result<()> {
    match key {
        SweepKey::F0 => config.f0 = value,
        SweepKey::Connections => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "connection-count sweep value must be a non-negative integer, got {value}"
                )));
            }
            config.connections[0] = value as usize;
        }
        SweepKey::Param(name) => {
            let p = &mut config.params;
            match *name {
                "gamma" => p.gamma = value,
                "eta" => p.eta = value,
                "omega" => p.omega = value,
                "omega_zz" => p.omega_zz = value,
                "tau" => p.tau = value,
                "t_me" => p.t_me = value,
                "t0" => p.t0 = value,
                "c" => p.c = value,
                "l0" => p.l0 = value,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown sweep parameter `{other}`"
                    )))
                }
            }
        }
    }
    Ok(())
}

/// Parses a run description, resolving defaults.
pub fn parse_config(text: &str) -> Result<RunSpec> {
    // First pass: collect (line, key, value) triples, rejecting
    // unknown and duplicate keys immediately.
    const KNOWN: [&str; 19] = [
        "command", "kind", "family", "f0", "gamma", "eta", "omega", "omega_zz", "tau", "t_me",
        "t0", "c", "l0", "levels", "L", "K", "sweep_key", "sweep_values", "out",
    ];
    let mut entries: Vec<(usize, &str, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let stripped = stripped.trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `key=value`, got `{stripped}`")))?;
        let key = key.trim();
        let value = value.trim().to_string();
        let canonical = KNOWN
            .iter()
            .find(|k| k.eq_ignore_ascii_case(key))
            .copied()
            .ok_or_else(|| err(line, format!("unknown key `{key}`")))?;
        if entries.iter().any(|(_, k, _)| *k == canonical) {
            return Err(err(line, format!("duplicate key `{canonical}`")));
        }
        entries.push((line, canonical, value));
    }

    let find = |key: &str| entries.iter().find(|(_, k, _)| *k == key);

    let (cmd_line, _, cmd_value) = find("command")
        .ok_or_else(|| err(0, "missing required key `command`"))?;
    let command = Command::parse(cmd_value)
        .ok_or_else(|| err(*cmd_line, format!("unknown command `{cmd_value}`")))?;

    let mut config = RepeaterConfig::default();

    // `levels` first: it re-derives the default L/K lists.
    if let Some((line, _, value)) = find("levels") {
        let levels = parse_usize(*line, "levels", value)?;
        if levels == 0 {
            return Err(err(*line, "levels must be at least 1"));
        }
        config.levels = levels;
        config.connections = (0..levels).map(|i| usize::from(i > 0)).collect();
        config.pump_rounds = vec![5; levels];
    }

    for (line, key, value) in &entries {
        match *key {
            "command" | "levels" | "sweep_key" | "sweep_values" | "out" => {}
            "kind" => {
                config.kind = if value.eq_ignore_ascii_case("ATOM") {
                    RepeaterKind::Atom
                } else if value.eq_ignore_ascii_case("DFS") {
                    RepeaterKind::Dfs
                } else {
                    return Err(err(*line, format!("unknown kind `{value}`")));
                };
            }
            "family" => {
                config.family = if value.eq_ignore_ascii_case("WERNER") {
                    PairFamily::Werner
                } else if value.eq_ignore_ascii_case("BINARY") {
                    PairFamily::Binary
                } else {
                    return Err(err(*line, format!("unknown family `{value}`")));
                };
            }
            "f0" => config.f0 = parse_f64(*line, key, value)?,
            "gamma" => config.params.gamma = parse_f64(*line, key, value)?,
            "eta" => config.params.eta = parse_f64(*line, key, value)?,
            "omega" => config.params.omega = parse_f64(*line, key, value)?,
            "omega_zz" => config.params.omega_zz = parse_f64(*line, key, value)?,
            "tau" => config.params.tau = parse_f64(*line, key, value)?,
            "t_me" => config.params.t_me = parse_f64(*line, key, value)?,
            "t0" => config.params.t0 = parse_f64(*line, key, value)?,
            "c" => config.params.c = parse_f64(*line, key, value)?,
            "l0" => config.params.l0 = parse_f64(*line, key, value)?,
            "L" => {
                let list = parse_usize_list(*line, key, value)?;
                if list.len() != config.levels {
                    return Err(err(
                        *line,
                        format!(
                            "`L` has {} entries but levels = {}",
                            list.len(),
                            config.levels
                        ),
                    ));
                }
                config.connections = list;
            }
            "K" => {
                let list = parse_usize_list(*line, key, value)?;
                if list.len() != config.levels {
                    return Err(err(
                        *line,
                        format!(
                            "`K` has {} entries but levels = {}",
                            list.len(),
                            config.levels
                        ),
                    ));
                }
                config.pump_rounds = list;
            }
            other => unreachable!("unhandled known key `{other}`"),
        }
    }

    let sweep_key = match find("sweep_key") {
        None => None,
        Some((line, _, value)) => Some(if value.eq_ignore_ascii_case("f0") {
            SweepKey::F0
        } else if value.eq_ignore_ascii_case("L") {
            if command != Command::Swap {
                return Err(err(*line, "sweep over `L` is only supported for SWAP"));
            }
            SweepKey::Connections
        } else if let Some(name) = SWEEPABLE_PARAMS
            .iter()
            .find(|p| p.eq_ignore_ascii_case(value))
        {
            SweepKey::Param(name)
        } else {
            return Err(err(*line, format!("`{value}` is not a sweepable parameter")));
        }),
    };

    let sweep_values = match find("sweep_values") {
        None => Vec::new(),
        Some((line, _, value)) => {
            if sweep_key.is_none() {
                return Err(err(*line, "sweep_values given without sweep_key"));
            }
            parse_f64_list(*line, "sweep_values", value)?
        }
    };

    let out = find("out").map(|(_, _, value)| value.clone());

    // Validate the resolved base configuration eagerly so bad files
    // fail at parse time, not mid-run.
    config.validate().map_err(|e| err(0, e.to_string()))?;

    Ok(RunSpec {
        command,
        config,
        sweep_key,
        sweep_values,
        out,
    })
}
