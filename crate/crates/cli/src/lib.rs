//! Library side of the `ringbump` binary: config parsing, subcommand drivers and
//! artifact output.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use serde_json::json;
use thiserror::Error;

use crate::commands::{dispatch, Check};
use crate::config::RunConfig;
use crate::output::Artifact;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Numeric(#[from] ringbump::Error),
    #[error("writing `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// Process exit code: 2 for config problems, 3 for numerical or I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric(_) | RunError::Io { .. } => 3,
        }
    }

    /// One-line JSON description for stderr.
    pub fn to_json(&self) -> String {
        let (kind, key) = match self {
            RunError::Config(e) => ("config", e.key().map(str::to_string)),
            RunError::Numeric(_) => ("numeric", None),
            RunError::Io { .. } => ("io", None),
        };
        json!({"error": kind, "key": key, "message": self.to_string()}).to_string()
    }
}

pub struct RunOutcome {
    pub checks: Vec<Check>,
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Run the configured command and write its artifacts, `run.conf` and `manifest.json`
/// into the output directory.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let out = dispatch(cfg)?;
    let passed = out.checks.iter().all(|c| c.passed);
    let mut artifacts = out.artifacts;
    artifacts.push(Artifact {
        name: "run.conf".into(),
        bytes: cfg.to_config_text().into_bytes(),
    });

    let config: serde_json::Map<String, serde_json::Value> = cfg
        .to_pairs()
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.into()))
        .collect();
    let manifest = json!({
        "tool": "ringbump",
        "versions": {"ringbump": ringbump::VERSION, "ringbump-cli": env!("CARGO_PKG_VERSION")},
        "command": cfg.command.name(),
        "config": config,
        "outputs": artifacts.iter().map(|a| json!({
            "file": a.name, "bytes": a.bytes.len(), "sha256": a.sha256(),
        })).collect::<Vec<_>>(),
        "checks": out.checks.iter().map(|c| json!({
            "name": c.name, "passed": c.passed, "detail": c.detail,
        })).collect::<Vec<_>>(),
        "status": if passed { "pass" } else { "fail" },
        "wall_time_seconds": start.elapsed().as_secs_f64(),
    });
    artifacts.push(Artifact::json("manifest.json", &manifest));

    let dir = &cfg.output_dir;
    let io_err = |path: PathBuf| move |source| RunError::Io { path, source };
    std::fs::create_dir_all(dir).map_err(io_err(dir.clone()))?;
    let mut files = Vec::with_capacity(artifacts.len());
    for a in &artifacts {
        let path = dir.join(&a.name);
        a.write_into(dir).map_err(io_err(path.clone()))?;
        files.push(path);
    }
    Ok(RunOutcome {
        checks: out.checks,
        lines: out.lines,
        files,
    })
}
