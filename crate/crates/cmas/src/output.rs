//! Per-experiment output directory with a manifest of every file written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Experiment;
use crate::error::{HarnessError, Result};
use crate::formats::csv_bytes;

#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(HarnessError::io(root))?;
        Ok(OutputDir { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, relative: &str) -> PathBuf {
        self.root.join(relative)
    }

    pub fn write_bytes(&mut self, relative: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(relative);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
        }
        fs::write(&path, bytes).map_err(HarnessError::io(&path))?;
        self.files.push(relative.to_string());
        Ok(path)
    }

    pub fn write_text(&mut self, relative: &str, text: &str) -> Result<PathBuf> {
        self.write_bytes(relative, text.as_bytes())
    }

    pub fn write_csv<T: Serialize>(&mut self, relative: &str, rows: &[T]) -> Result<PathBuf> {
        self.write_bytes(relative, &csv_bytes(rows)?)
    }

    /// Writes `manifest.json` listing the experiment, its derived seeds and
    /// the files produced, and returns the sorted file list.
    pub fn finish(mut self, experiment: &Experiment, seeds: Vec<SeedRecord>) -> Result<Vec<String>> {
        self.files.sort();
        self.files.dedup();
        let manifest = Manifest {
            kind: experiment.kind.label(),
            seed: experiment.spec.seed,
            profile: experiment.spec.profile,
            fingerprint: &experiment.fingerprint,
            repeats: experiment.repeats,
            environments: experiment
                .environments
                .iter()
                .map(|e| EnvironmentRecord {
                    label: &e.label,
                    opponents: &e.opponents,
                    n: e.config.n,
                    k: e.config.k,
                    agents: e.config.num_agents,
                    steps: e.config.steps,
                    batch_seed: e.config.seed,
                })
                .collect(),
            strategies: experiment.strategies.iter().map(|s| s.label.as_str()).collect(),
            seeds,
            files: &self.files,
        };
        let json = serde_json::to_string_pretty(&manifest)?;
        let path = self.root.join("manifest.json");
        fs::write(&path, json + "\n").map_err(HarnessError::io(&path))?;
        Ok(self.files)
    }
}

/// A seed derived for one unit of work, enough to replay it alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRecord {
    pub label: String,
    pub seed: u64,
}

#[derive(Serialize)]
struct EnvironmentRecord<'a> {
    label: &'a str,
    opponents: &'a [String],
    n: usize,
    k: usize,
    agents: usize,
    steps: usize,
    /// Run `r` uses `derive(batch_seed, [RUN, r])`.
    batch_seed: u64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    kind: &'a str,
    seed: u64,
    profile: crate::config::Profile,
    fingerprint: &'a str,
    repeats: usize,
    environments: Vec<EnvironmentRecord<'a>>,
    strategies: Vec<&'a str>,
    seeds: Vec<SeedRecord>,
    files: &'a [String],
}
