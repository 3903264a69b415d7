//! Evolution checkpoints: the whole population state plus the fingerprint
//! of the experiment that produced it.

use std::fs;
use std::path::Path;

use cmas_core::neat::Evolution;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

const FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: u32,
    pub fingerprint: String,
    pub group: String,
    pub run: usize,
    pub evolution: Evolution,
}

impl Checkpoint {
    pub fn new(fingerprint: &str, group: &str, run: usize, evolution: &Evolution) -> Self {
        Checkpoint {
            format: FORMAT,
            fingerprint: fingerprint.into(),
            group: group.into(),
            run,
            evolution: evolution.clone(),
        }
    }

    /// Writes atomically so an interrupted save never leaves a torn file.
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
        }
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_vec(self)?).map_err(HarnessError::io(&tmp))?;
        fs::rename(&tmp, path).map_err(HarnessError::io(path))
    }

    /// Loads a checkpoint and checks it belongs to this experiment.
    pub fn load(path: &Path, fingerprint: &str, group: &str, run: usize) -> Result<Evolution> {
        let bytes = fs::read(path).map_err(HarnessError::io(path))?;
        let c: Checkpoint = serde_json::from_slice(&bytes)
            .map_err(|e| HarnessError::Parse { path: path.into(), message: e.to_string() })?;
        if c.format != FORMAT {
            return Err(HarnessError::config(format!(
                "{}: unsupported checkpoint format {}",
                path.display(),
                c.format
            )));
        }
        if c.fingerprint != fingerprint || c.group != group || c.run != run {
            return Err(HarnessError::config(format!(
                "{} was written by a different experiment; remove it or restore the original spec",
                path.display()
            )));
        }
        Ok(c.evolution)
    }
}
