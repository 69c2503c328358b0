//! Command-line front end: parse a run description, execute it, and
//! write the CSV to the configured destination.
//!
//! Exit codes: 0 on success, 2 for configuration errors (bad file,
//! malformed run description), 3 for runtime failures during the
//! simulation itself.

use std::fs;
use std::process::ExitCode;

use clap::Parser;
use qrepsim::config::parse_config;
use qrepsim::run::sweep_execute;
use qrepsim::Error;

/// Noisy-repeater simulator: executes a `key=value` run description
/// and emits one CSV document.
#[derive(Parser)]
#[command(name = "qrepsim", version, about)]
struct Cli {
    /// Path to the run-description file.
    config: String,

    /// Write the CSV here instead of the destination named in the run
    /// description (or stdout).
    #[arg(long)]
    out: Option<String>,

    /// Worker threads for sweep evaluation. The output is
    /// byte-identical for every worker count.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let text = match fs::read_to_string(&cli.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read `{}`: {e}", cli.config);
            return ExitCode::from(2);
        }
    };

    let spec = match parse_config(&text) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let csv = match sweep_execute(&spec, cli.workers.max(1)) {
        Ok(csv) => csv,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                Error::Config { .. } => 2,
                _ => 3,
            });
        }
    };

    let destination = cli.out.as_deref().or(spec.out.as_deref());
    match destination {
        Some(path) => {
            if let Err(e) = fs::write(path, &csv) {
                eprintln!("error: cannot write `{path}`: {e}");
                return ExitCode::from(3);
            }
        }
        None => print!("{csv}"),
    }
    ExitCode::SUCCESS
}
