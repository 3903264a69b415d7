use std::path::PathBuf;

use cmas_core::analysis::AnalysisError;
use cmas_core::neat::NeatError;
use cmas_core::simulation::SimError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Bad experiment description: unknown names, missing files, invalid
    /// parameters.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Neat(#[from] NeatError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn config(message: impl Into<String>) -> Self {
        HarnessError::Config(message.into())
    }

    /// Whether the failure lies in the experiment description rather than
    /// in running it.
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_) | HarnessError::Parse { .. })
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
