//! Experiment harness for the competitive multi-agent search model: config
//! files, file formats, parallel evaluation and the experiment runners.

pub use cmas_core as core;

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod evaluator;
pub mod experiments;
pub mod formats;
pub mod output;
pub mod stats;
pub mod svg;

pub use config::{Experiment, ExperimentKind, ExperimentSpec, Profile};
pub use error::{HarnessError, Result};
pub use experiments::{run_experiment, ExperimentReport};
