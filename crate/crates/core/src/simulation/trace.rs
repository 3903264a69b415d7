use alloc::vec::Vec;

use crate::landscape::Point;
use crate::strategy::{FitnessLevel, MemorySource, S1Action, StateOccupancy};

/// What one agent did in one time step (step 0 is initialization).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepRecord {
    pub step: u32,
    pub agent: u32,
    /// Position at the end of the step.
    pub position: Point,
    /// Current fitness of `position` before the step's flocking update.
    pub fitness: f64,
    pub evaluations: u32,
    /// `(public, private)` memory levels seen by a table strategy.
    pub state: Option<(FitnessLevel, FitnessLevel)>,
    pub action: Option<S1Action>,
    /// New-point level and chosen destination when a point was found.
    pub placement: Option<(FitnessLevel, MemorySource)>,
    pub moved: bool,
    /// Points recorded as landscape visits this step.
    pub visits: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunTrace {
    pub n: usize,
    pub num_agents: usize,
    pub steps: usize,
    pub seed: u64,
    /// Step-major, agent-minor.
    pub records: Vec<StepRecord>,
}

impl RunTrace {
    pub fn record(&self, step: usize, agent: usize) -> &StepRecord {
        &self.records[step * self.num_agents + agent]
    }

    pub fn agent_records(&self, agent: usize) -> impl Iterator<Item = &StepRecord> + '_ {
        self.records.iter().filter(move |r| r.agent as usize == agent)
    }

    /// Mean fitness-at-visit over the non-initialization steps.
    pub fn performance(&self, agent: usize) -> f64 {
        let (sum, count) =
            self.agent_records(agent).filter(|r| r.step > 0).fold((0.0, 0usize), |(s, c), r| (s + r.fitness, c + 1));
        if count == 0 {
            f64::NAN
        } else {
            sum / count as f64
        }
    }

    pub fn mean_evaluations(&self, agent: usize) -> f64 {
        let (sum, count) = self
            .agent_records(agent)
            .filter(|r| r.step > 0)
            .fold((0u64, 0usize), |(s, c), r| (s + r.evaluations as u64, c + 1));
        if count == 0 {
            0.0
        } else {
            sum as f64 / count as f64
        }
    }

    pub fn occupancy(&self, agent: usize) -> StateOccupancy {
        let mut occ = StateOccupancy::default();
        for r in self.agent_records(agent) {
            if let Some((public, private)) = r.state {
                occ.record_s1(public, private);
            }
            if let Some((level, _)) = r.placement {
                occ.record_s2(level);
            }
        }
        occ
    }

    pub fn positions(&self, agent: usize) -> Vec<Point> {
        self.agent_records(agent).map(|r| r.position).collect()
    }
}
