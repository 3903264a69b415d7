//! Competitive multi-agent search on dynamic NK fitness landscapes.
//!
//! This crate is the allocation-only core: landscapes with visit-driven
//! flocking, probabilistic memory/search strategies, the deferred-update
//! simulation loop, a depth-2 real-time tree-search baseline, CPPN strategy
//! encoding with NEAT evolution, and the analysis and spherical-grid
//! geometry used for figures. It builds under `#![no_std]`; file formats,
//! rendering and the command line live in the `cmas` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod catalog;
pub mod cppn;
pub mod landscape;
pub mod neat;
pub mod rtts;
pub mod seed;
pub mod simulation;
pub mod sphereviz;
pub mod strategy;

pub use landscape::{FlockingConfig, Landscape, LandscapeError, PendingVisits, Point};
pub use simulation::{
    evaluate_strategy, run_simulation, EnvironmentConfig, PerformanceStats, Policy, RunTrace, VisitPolicy,
};
pub use strategy::{FitnessLevel, Strategy};
