//! Named experiments for anyonic quantum walks, with validated
//! configuration, deterministic CSV/JSON outputs and a manifest per run.

pub mod config;
pub mod run;

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{validate, ConfigFile, Diagnostic, Experiment, ExperimentConfig, Severity};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "ANYONWALK_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration:\n{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] anyonwalk::Error),
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputDigest {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub warnings: Vec<Diagnostic>,
    pub assumptions: Vec<String>,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Validates, runs, writes the outputs and `manifest.json` into the
/// configured directory.
pub fn run(file: &ConfigFile) -> Result<RunManifest, CliError> {
    let (cfg, diags) = validate(file);
    if config::has_errors(&diags) {
        return Err(CliError::Invalid(diags));
    }
    let cfg = cfg.expect("configuration resolved without errors");
    let start = Instant::now();
    let result = run::run_experiment(&cfg)?;
    let wall = start.elapsed().as_secs_f64();

    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut outputs = Vec::new();
    for out in &result.outputs {
        write(&dir.join(&out.name), &out.bytes)?;
        outputs.push(OutputDigest {
            file: out.name.clone(),
            bytes: out.bytes.len(),
            sha256: sha256_hex(&out.bytes),
        });
    }
    let manifest = RunManifest {
        tool: "anyonwalk",
        version: env!("CARGO_PKG_VERSION"),
        experiment: cfg.experiment,
        config: cfg.clone(),
        warnings: diags,
        assumptions: result.assumptions,
        threads: rayon::current_num_threads(),
        wall_time_seconds: wall,
        outputs,
    };
    let mut bytes =
        serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    write(&dir.join("manifest.json"), &bytes)?;
    Ok(manifest)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
