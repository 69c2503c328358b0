//! Experiment execution and CSV emission.
//!
//! A [`RunSpec`] maps to one CSV document: a header row naming the
//! swept parameter (if any) and the command's output columns, then one
//! group of data rows per sweep point, in sweep order. Sweep points are
//! independent, so they may be evaluated concurrently; results are
//! gathered in input order, making the output byte-identical for any
//! worker count. Floats are printed in scientific notation with 12
//! significant digits; line endings are LF.

use crate::blocks::{
    pump_to_fixed_point, swap_chain, transfer_atom_atom, transfer_atom_dfs, transfer_dfs_dfs,
    PurifyPairKind,
};
use crate::config::{apply_sweep, Command, RunSpec, SweepKey};
use crate::protocol::{run_repeater, timing, RepeaterConfig};
use crate::states::entanglement_fidelity;
use crate::{Error, Result};
use rayon::prelude::*;

/// Formats one floating-point cell: 12 significant digits, scientific.
fn cell(x: f64) -> String {
    // Normalize negative zero so equal values always print identically.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

fn header(spec: &RunSpec) -> String {
    let columns = match spec.command {
        Command::Transfer => {
            "atom_atom_fidelity,atom_dfs_fidelity,dfs_dfs_fidelity,\
             atom_atom_duration,atom_dfs_duration,dfs_dfs_duration"
        }
        Command::Swap => "fidelity,success_probability,duration,distance",
        Command::Purify => "atom_atom_f_max,aux_dfs_f_max,dfs_dfs_f_max,distance",
        Command::Repeater => "level,distance,fidelity,success_probability,min_time",
        Command::Timing => "level,distance,min_time,pump_first_wait,pump_between_wait",
    };
    match &spec.sweep_key {
        Some(key) => format!("{},{columns}", key.name()),
        None => columns.to_string(),
    }
}

/// Computes the data rows (without any sweep column) for one resolved
/// configuration.
fn point_rows(command: Command, config: &RepeaterConfig) -> Result<Vec<String>> {
    config.validate()?;
    let p = &config.params;
    match command {
        Command::Transfer => {
            let pair = config.family.state(config.f0)?;
            let aa = transfer_atom_atom(&pair, p)?;
            let ad = transfer_atom_dfs(&pair, p)?;
            let dd = transfer_dfs_dfs(&pair, p)?;
            Ok(vec![[
                cell(entanglement_fidelity(&aa.state)?),
                cell(entanglement_fidelity(&ad.state)?),
                cell(entanglement_fidelity(&dd.state)?),
                cell(aa.duration),
                cell(ad.duration),
                cell(dd.duration),
            ]
            .join(",")])
        }
        Command::Swap => {
            let pair = config.family.state(config.f0)?;
            let l = config.connections[0];
            let chain = swap_chain(config.kind, l, &pair, p.l0, p)?;
            Ok(vec![[
                cell(entanglement_fidelity(&chain.state)?),
                cell(chain.success_probability),
                cell(chain.duration),
                cell((l as f64 + 1.0) * p.l0),
            ]
            .join(",")])
        }
        Command::Purify => {
            let pair = config.family.state(config.f0)?;
            let mut cells = Vec::with_capacity(4);
            for kind in [
                PurifyPairKind::AtomAtom,
                PurifyPairKind::AuxDfs,
                PurifyPairKind::DfsDfs,
            ] {
                let report = pump_to_fixed_point(kind, &pair, &pair, p.l0, 0.0, p)?;
                cells.push(cell(report.f_max));
            }
            cells.push(cell(p.l0));
            Ok(vec![cells.join(",")])
        }
        Command::Repeater => {
            let run = run_repeater(config)?;
            Ok(run
                .levels
                .iter()
                .map(|lvl| {
                    [
                        lvl.level.to_string(),
                        cell(lvl.span),
                        cell(lvl.fidelity),
                        cell(lvl.success_probability),
                        cell(lvl.min_time),
                    ]
                    .join(",")
                })
                .collect())
        }
        Command::Timing => {
            let report = timing(config)?;
            let mut rows = Vec::with_capacity(config.levels + 1);
            rows.push(
                [
                    "0".to_string(),
                    cell(report.spans[0]),
                    cell(p.t0),
                    cell(0.0),
                    cell(0.0),
                ]
                .join(","),
            );
            for n in 1..=config.levels {
                rows.push(
                    [
                        n.to_string(),
                        cell(report.spans[n]),
                        cell(report.level_min_times[n - 1]),
                        cell(report.pump_first_waits[n - 1]),
                        cell(report.pump_between_waits[n - 1]),
                    ]
                    .join(","),
                );
            }
            Ok(rows)
        }
    }
}

fn annotate(index: usize, key: &SweepKey, value: f64, e: Error) -> Error {
    if matches!(e, Error::Config { .. }) {
        return e;
    }
    Error::InvalidParameter(format!(
        "sweep point {index} ({}={value}): {e}",
        key.name()
    ))
}

/// Executes a run description on `workers` threads and returns the
/// complete CSV document. The output is byte-identical for every
/// `workers ≥ 1`.
pub fn sweep_execute(spec: &RunSpec, workers: usize) -> Result<String> {
    if workers == 0 {
        return Err(Error::InvalidParameter(
            "worker count must be at least 1".into(),
        ));
    }
    let mut lines = vec![header(spec)];

    match &spec.sweep_key {
        None => lines.extend(point_rows(spec.command, &spec.config)?),
        Some(key) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            let groups: Vec<Vec<String>> = pool.install(|| {
                spec.sweep_values
                    .par_iter()
                    .enumerate()
                    .map(|(i, &value)| {
                        let mut config = spec.config.clone();
                        apply_sweep(&mut config, key, value)
                            .and_then(|()| point_rows(spec.command, &config))
                            .map(|rows| {
                                rows.into_iter()
                                    .map(|row| format!("{},{row}", cell(value)))
                                    .collect()
                            })
                            .map_err(|e| annotate(i, key, value, e))
                    })
                    .collect::<Result<_>>()
            })?;
            lines.extend(groups.into_iter().flatten());
        }
    }

    let mut csv = lines.join("\n");
    csv.push('\n');
    Ok(csv)
}

/// Executes a run description serially (equivalent to one worker).
pub fn run(spec: &RunSpec) -> Result<String> {
    sweep_execute(spec, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use approx::assert_relative_eq;

    fn field(row: &str, idx: usize) -> f64 {
        row.split(',').nth(idx).unwrap().parse().unwrap()
    }

    #[test]
    fn swap_of_two_noiseless_werner_pairs_matches_the_recurrence() {
        let spec = parse_config(
            "command=swap\nlevels=1\nL=1\nK=0\nf0=0.8\ngamma=0\neta=1\n",
        )
        .unwrap();
        let csv = run(&spec).unwrap();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0], "fidelity,success_probability,duration,distance");
        // f' = f² + (1−f)²/3 at f = 0.8.
        assert_relative_eq!(field(rows[1], 0), 0.64 + 0.04 / 3.0, epsilon = 1e-9);
        assert_relative_eq!(field(rows[1], 1), 1.0, epsilon = 1e-9);
        assert_relative_eq!(field(rows[1], 3), 2e4, epsilon = 1e-9);
    }

    #[test]
    fn transfer_fidelity_decreases_monotonically_in_gamma() {
        let spec = parse_config(
            "command=transfer\nsweep_key=gamma\nsweep_values=0,5,10,20,40\n",
        )
        .unwrap();
        let csv = run(&spec).unwrap();
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 5);
        for pair in rows.windows(2) {
            for col in 1..=3 {
                assert!(
                    field(pair[0], col) > field(pair[1], col),
                    "column {col} not decreasing: {} vs {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn repeater_rows_cover_every_level() {
        let spec = parse_config(
            "command=repeater\nkind=ATOM\nlevels=2\nL=0,1\nK=1,1\ngamma=0\neta=1\n",
        )
        .unwrap();
        let csv = run(&spec).unwrap();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows.len(), 4); // header + levels 0..=2
        assert!(rows[0].starts_with("level,"));
        assert_eq!(field(rows[1], 0), 0.0);
        assert_eq!(field(rows[3], 0), 2.0);
        // Noiseless: fidelity at the top level stays above the input.
        assert!(field(rows[3], 2) > 0.9);
    }

    #[test]
    fn header_only_output_for_an_empty_sweep() {
        let spec =
            parse_config("command=timing\nsweep_key=l0\nsweep_values=\n").unwrap();
        let csv = run(&spec).unwrap();
        assert_eq!(csv, "l0,level,distance,min_time,pump_first_wait,pump_between_wait\n");
    }

    #[test]
    fn sweep_output_is_identical_across_worker_counts() {
        let spec = parse_config(
            "command=timing\nsweep_key=l0\nsweep_values=1e4,2e4,5e4,1e5,2e5\n",
        )
        .unwrap();
        let serial = sweep_execute(&spec, 1).unwrap();
        let parallel = sweep_execute(&spec, 4).unwrap();
        assert_eq!(serial, parallel);
        assert!(serial.lines().count() > 5);
    }

    #[test]
    fn timing_rows_match_the_direct_report() {
        let spec = parse_config("command=timing\nkind=ATOM\n").unwrap();
        let csv = run(&spec).unwrap();
        let report = timing(&spec.config).unwrap();
        let last = csv.lines().last().unwrap();
        assert_relative_eq!(field(last, 1), report.spans[12], epsilon = 1e-6);
        assert_relative_eq!(
            field(last, 2),
            report.level_min_times[11],
            epsilon = 1e-6
        );
    }

    #[test]
    fn cells_print_twelve_significant_digits() {
        assert_eq!(cell(0.8), "8.00000000000e-1");
        assert_eq!(cell(-0.0), "0.00000000000e0");
        assert_eq!(cell(20480e3), "2.04800000000e7");
    }
}
