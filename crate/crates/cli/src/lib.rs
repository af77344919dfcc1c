//! Config-driven runner for correlated-decoherence scenarios.
//!
//! A run reads one TOML config, executes its scenario and writes
//! `<scenario>-<hash>.csv` and `<scenario>-<hash>.json` into the output
//! directory, where `<hash>` identifies the resolved configuration.

pub mod config;
pub mod diagnostics;
pub mod output;
pub mod scenarios;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub use config::{parse_config, ConfigError, Scenario, ScenarioConfig, SCENARIOS};
pub use diagnostics::{Code, Diagnostic};
pub use output::RunReport;

use output::{csv_stamp, to_json, GIT_HASH, VERSION};
use scenarios::{run_scenario, Body};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CP: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{scenario} failed: {source}")]
    Compute {
        scenario: Scenario,
        #[source]
        source: corrdeco_core::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Paths and verdict of a finished run.
#[derive(Debug)]
pub struct RunSummary {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub report: RunReport,
}

/// Artifact directory from `CORRDECO_OUTPUT_DIR`, defaulting to `.`.
pub fn output_dir() -> PathBuf {
    std::env::var_os(output::OUTPUT_DIR_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Runs one validated config and writes its artifacts into `out_dir`.
pub fn execute(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunSummary, RunError> {
    let outcome = run_scenario(cfg).map_err(|source| RunError::Compute {
        scenario: cfg.scenario,
        source,
    })?;
    let hash = cfg.hash();
    let stem = format!("{}-{hash}", cfg.scenario.name());
    let csv = out_dir.join(format!("{stem}.csv"));
    let json = out_dir.join(format!("{stem}.json"));
    let werr = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Write { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(werr(out_dir))?;

    let mut w = BufWriter::new(File::create(&csv).map_err(werr(&csv))?);
    writeln!(w, "{}", csv_stamp(cfg.scenario.name(), &hash)).map_err(werr(&csv))?;
    match &outcome.body {
        Body::Table(t) => t.write_body(&mut w).map_err(werr(&csv))?,
        Body::Trajectory { traj, pairs } => traj.write_csv(&mut w, pairs).map_err(|e| match e {
            corrdeco_core::Error::Io(source) => RunError::Write {
                path: csv.clone(),
                source,
            },
            source => RunError::Compute {
                scenario: cfg.scenario,
                source,
            },
        })?,
    }
    w.flush().map_err(werr(&csv))?;

    let report = RunReport {
        version: VERSION,
        git: GIT_HASH,
        scenario: cfg.scenario.name().to_string(),
        config_hash: hash,
        inputs: serde_json::to_value(cfg).expect("config serializes"),
        results: outcome.results,
        warnings: outcome.warnings,
        exit_status: outcome.exit_status,
    };
    let text = to_json(&report).expect("report serializes");
    std::fs::write(&json, text).map_err(werr(&json))?;
    Ok(RunSummary { csv, json, report })
}

/// Parses and runs the config at `path`.
pub fn run_path(path: &Path, out_dir: &Path) -> Result<RunSummary, RunError> {
    let cfg = parse_config(path)?;
    execute(&cfg, out_dir)
}
