//! Scenario runner for the holonomic-gate toolkit: config handling, the named
//! scenarios, and CSV/JSON/SVG artifact output with a run manifest.

pub mod config;
pub mod output;
pub mod plot;
pub mod scenarios;

use std::path::PathBuf;
use std::time::Instant;

use config::{Format, Resolved};
use output::Manifest;

pub const ENV_OUT: &str = "HOLOSIM_OUT";
pub const DEFAULT_OUT: &str = "holosim-out";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("scenario {scenario} failed: {message}")]
    Simulation { scenario: String, message: String },

    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Simulation { .. } | CliError::Io(_) => 3,
        }
    }
}

/// Output directory: explicit flag, then `output.dir` from the config, then
/// `$HOLOSIM_OUT`, then `holosim-out`.
pub fn output_dir(flag: Option<PathBuf>, resolved: &Resolved) -> PathBuf {
    flag.or_else(|| resolved.config.output.dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(ENV_OUT).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Runs `scenario` and writes its artifacts into `<dir>/<scenario>/`.
pub fn run(scenario: &str, resolved: &Resolved, dir: &std::path::Path) -> Result<(PathBuf, Manifest), CliError> {
    if scenarios::find(scenario).is_none() {
        let names: Vec<&str> = scenarios::SCENARIOS.iter().map(|s| s.name).collect();
        return Err(CliError::Config(format!("unknown scenario `{scenario}`; expected one of {}", names.join(", "))));
    }
    if let Some(named) = &resolved.config.scenario {
        if named != scenario {
            return Err(CliError::Config(format!(
                "scenario: config names `{named}` but `{scenario}` was requested"
            )));
        }
    }
    let start = Instant::now();
    let out = scenarios::run_scenario(scenario, &resolved.config)
        .map_err(|e| CliError::Simulation { scenario: scenario.to_string(), message: e.to_string() })?;
    let target = dir.join(scenario);
    let mut formats: Vec<Format> = resolved.config.output.formats.clone();
    formats.sort();
    formats.dedup();
    let manifest = output::write_all(&target, scenario, resolved, &out, &formats, start.elapsed().as_secs_f64())?;
    Ok((target, manifest))
}
