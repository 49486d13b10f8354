//! Batch front end for the Beltrami pipelines.
//!
//! A run reads one TOML configuration, parses every referenced input before
//! computing anything, dispatches to one pipeline and writes `report.json`
//! (sorted keys) plus CSV tables into the output directory. The exit status
//! is 0 when every declared contract holds, 1 when one fails, 2 for an
//! invalid configuration or input, and 3 for an internal failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::Path;

use beltrami_core::Rational;

pub use config::{Command, LoadedConfig, NumericMode, RunConfig};
pub use error::CliError;
pub use report::{Contract, Outcome, Table, Written};

/// Runs the pipeline a loaded configuration selects.
pub fn execute(l: &LoadedConfig) -> Result<Outcome, CliError> {
    use NumericMode::{Exact, Float};
    match (l.config.command, l.mode) {
        (Command::Symbols, Exact) => commands::symbols::<Rational>(l),
        (Command::Symbols, Float) => commands::symbols::<f64>(l),
        (Command::Recover, Exact) => commands::recover::<Rational>(l),
        (Command::Recover, Float) => commands::recover::<f64>(l),
        (Command::Roundtrip, Exact) => commands::roundtrip::<Rational>(l),
        (Command::Roundtrip, Float) => commands::roundtrip::<f64>(l),
        (Command::Slab, _) => commands::slab(l),
        (Command::Bfield, _) => commands::bfield(l),
        (Command::Embed, _) => commands::embed(l),
    }
}

fn mode_name(m: NumericMode) -> &'static str {
    match m {
        NumericMode::Exact => "exact",
        NumericMode::Float => "float",
    }
}

/// What a finished run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub exit_code: i32,
    pub written: Option<Written>,
    /// Failed contract names, or the error message.
    pub messages: Vec<String>,
}

/// Executes a loaded configuration and writes its report.
pub fn run_loaded(l: &LoadedConfig) -> RunSummary {
    let outcome = match execute(l) {
        Ok(o) => o,
        Err(e) => return failure(e),
    };
    match report::write_report(&l.output_dir, &l.config, mode_name(l.mode), &outcome) {
        Ok(w) => RunSummary {
            exit_code: if outcome.passed() { 0 } else { 1 },
            written: Some(w),
            messages: outcome
                .contracts
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("contract failed: {} (measured {:e})", c.name, c.measured))
                .collect(),
        },
        Err(e) => failure(e),
    }
}

fn failure(e: CliError) -> RunSummary {
    RunSummary {
        exit_code: e.exit_code(),
        written: None,
        messages: vec![e.to_string()],
    }
}

/// Loads the configuration at `path`, optionally requiring a command, and
/// runs it.
pub fn run(path: &Path, expect: Option<Command>) -> RunSummary {
    let loaded = match RunConfig::load(path) {
        Ok(l) => l,
        Err(e) => return failure(e),
    };
    if let Some(c) = expect {
        if c != loaded.config.command {
            return failure(CliError::Parse(format!(
                "configuration declares command '{}', not '{}'",
                loaded.config.command.as_str(),
                c.as_str()
            )));
        }
    }
    run_loaded(&loaded)
}
