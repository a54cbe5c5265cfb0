//! Scenario-driven front end for `mttdl-core`.

pub mod commands;
pub mod config;
pub mod error;

use std::path::Path;

pub use config::ScenarioConfig;
pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Sweep,
    Overhead,
    Pyramid,
    Allocate,
    Simulate,
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioConfig::from_json(&text)
}

/// Runs one subcommand and returns the bytes to emit.
pub fn run(command: Command, config: &ScenarioConfig, seed: Option<u64>) -> Result<Vec<u8>, CliError> {
    match command {
        Command::Analyze => Ok(json(&commands::analyze(config, seed)?)),
        Command::Simulate => Ok(json(&commands::simulate(config, seed)?)),
        Command::Sweep => commands::sweep(config),
        Command::Overhead => commands::overhead(config),
        Command::Pyramid => commands::pyramid(config),
        Command::Allocate => commands::allocate(config),
    }
}

fn json<T: serde::Serialize>(report: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}
