use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use equilox::solver::SolveParams;

#[derive(Debug, Clone, Serialize)]
pub struct InstanceRef {
    /// Path as given, or the bundled name.
    pub source: String,
    pub sha256: String,
}

impl InstanceRef {
    pub fn new(source: &str, text: &str) -> Self {
        InstanceRef {
            source: source.to_string(),
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Seeds {
    pub solver: u64,
    pub sampling: Option<u64>,
    pub clustering: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterConfig {
    /// `flag`, `instance` or `elbow`.
    pub source: String,
    pub ks: Option<Vec<usize>>,
}

/// Everything needed to repeat a command.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub instance: Option<InstanceRef>,
    pub formulations: Vec<String>,
    pub params: Option<SolveParams>,
    pub backend: Option<String>,
    pub seeds: Option<Seeds>,
    pub clusters: Option<ClusterConfig>,
    pub options: serde_json::Value,
    pub artifacts: Vec<PathBuf>,
    pub results: serde_json::Value,
    pub started_at: DateTime<Utc>,
    pub finished_at: Option<DateTime<Utc>>,
    pub exit_code: Option<i32>,
    pub error: Option<String>,
}

impl RunManifest {
    pub fn start(command: &str) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            argv: std::env::args().collect(),
            instance: None,
            formulations: Vec::new(),
            params: None,
            backend: None,
            seeds: None,
            clusters: None,
            options: serde_json::Value::Null,
            artifacts: Vec::new(),
            results: serde_json::Value::Null,
            started_at: Utc::now(),
            finished_at: None,
            exit_code: None,
            error: None,
        }
    }

    pub fn finish(&mut self, exit_code: i32, error: Option<String>) {
        self.finished_at = Some(Utc::now());
        self.exit_code = Some(exit_code);
        self.error = error;
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")
    }
}

/// `out/<timestamp>-<label>` under the working directory.
pub fn default_out_dir(label: &str) -> PathBuf {
    PathBuf::from("out").join(format!("{}-{label}", Utc::now().format("%Y%m%dT%H%M%S")))
}
