//! On-disk solution cache, one JSON file per (model, params) pair.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{Solution, SolveParams};
use crate::error::SolverError;
use crate::models::mps::{write_mps, MpsFormat};
use crate::models::ModelIR;

#[derive(Debug, Clone)]
pub struct SolutionCache {
    dir: PathBuf,
}

impl SolutionCache {
    /// Entries live in `<root>/cache/<hash>.json`.
    pub fn new(root: impl AsRef<Path>) -> Self {
        SolutionCache {
            dir: root.as_ref().join("cache"),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// sha256 over the free MPS text and the serialized parameters.
    pub fn key(model: &ModelIR, params: &SolveParams) -> String {
        let mut h = Sha256::new();
        h.update(write_mps(model, MpsFormat::Free).as_bytes());
        h.update(b"\0");
        h.update(serde_json::to_vec(params).expect("params serialize"));
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<Solution> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        match serde_json::from_str(&text) {
            Ok(sol) => Some(sol),
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {key}: {e}");
                None
            }
        }
    }

    /// Writes through a temp file and renames it into place, so concurrent
    /// writers of the same key never leave a torn file.
    pub fn put(&self, key: &str, sol: &Solution) -> Result<(), SolverError> {
        std::fs::create_dir_all(&self.dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(serde_json::to_string(sol)?.as_bytes())?;
        tmp.persist(self.path(key)).map_err(|e| SolverError::Io(e.error))?;
        Ok(())
    }
}
