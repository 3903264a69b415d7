//! Agents, memories and the deferred-update simulation loop.
//!
//! Within a time step every agent acts against the landscape and public
//! memory as they stood at the start of the step. Visits and public memory
//! placements are buffered and applied once all agents have acted, so the
//! outcome of a step does not depend on the order agents are advanced in.

mod memory;
mod search;
mod trace;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

pub use memory::{Memory, MemoryEntry};
pub use search::{exploit_in_order, exploit_step, explore_step, flip_count_range, SearchOutcome};
pub use trace::{RunTrace, StepRecord};

use crate::landscape::{
    ContributionTable, FlockingConfig, Landscape, LandscapeError, PendingVisits, Point, MAX_DIMENSIONS,
};
use crate::rtts::{RttsAgent, RttsMode};
use crate::seed::{self, Rng};
use crate::strategy::{level_of, MemorySource, SearchMethod, StateOccupancy, Strategy};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid environment: {0}")]
    Config(String),
    #[error(transparent)]
    Landscape(#[from] LandscapeError),
}

/// Which probes count as landscape visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum VisitPolicy {
    /// Every evaluated point flocks.
    #[default]
    AllEvaluations,
    /// Only the point an agent moves to flocks.
    AcceptedOnly,
}

/// How an agent chooses its moves.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Policy {
    Table(Strategy),
    Rtts(RttsMode),
}

impl Policy {
    pub fn label(&self) -> String {
        match self {
            Policy::Table(s) => s.label.clone(),
            Policy::Rtts(RttsMode::Unlimited) => "rtts".to_string(),
            Policy::Rtts(RttsMode::BudgetMatched) => "rtts-matched".to_string(),
        }
    }

    pub fn strategy(&self) -> Option<&Strategy> {
        match self {
            Policy::Table(s) => Some(s),
            Policy::Rtts(_) => None,
        }
    }
}

impl From<Strategy> for Policy {
    fn from(s: Strategy) -> Self {
        Policy::Table(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvironmentConfig {
    pub n: usize,
    pub k: usize,
    pub num_agents: usize,
    pub steps: usize,
    /// One policy shared by every opponent, or one per opponent in order.
    pub opponents: Vec<Policy>,
    pub explore_range: (f64, f64),
    pub max_jump_attempts: usize,
    pub flocking: FlockingConfig,
    pub visit_policy: VisitPolicy,
    /// Per-run seed: landscape and agent streams are derived from it.
    pub seed: u64,
}

impl EnvironmentConfig {
    /// Eight agents, 100 steps, K = 3 and default flocking.
    pub fn standard(n: usize, opponents: Vec<Policy>) -> Self {
        EnvironmentConfig {
            n,
            k: 3,
            num_agents: 8,
            steps: 100,
            opponents,
            explore_range: (0.5, 1.0),
            max_jump_attempts: 10,
            flocking: FlockingConfig::default(),
            visit_policy: VisitPolicy::AllEvaluations,
            seed: 0,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        EnvironmentConfig { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.n == 0 || self.n > MAX_DIMENSIONS {
            return Err(LandscapeError::Dimensions(self.n).into());
        }
        if self.k >= self.n {
            return Err(LandscapeError::Interactions { n: self.n, k: self.k }.into());
        }
        self.flocking.validate()?;
        if self.num_agents == 0 {
            return bad("at least one agent is required".into());
        }
        let opponents = self.num_agents - 1;
        if opponents > 0 && self.opponents.len() != 1 && self.opponents.len() != opponents {
            return bad(format!("{} opponent policies given for {} opponents", self.opponents.len(), opponents));
        }
        let (lo, hi) = self.explore_range;
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return bad(format!("explore range [{lo}, {hi}] must lie within (0, 1]"));
        }
        if flip_count_range(self.n, self.explore_range).is_none() {
            return bad(format!("explore range [{lo}, {hi}] admits no flip count at n = {}", self.n));
        }
        if self.max_jump_attempts == 0 {
            return bad("max_jump_attempts must be at least 1".into());
        }
        Ok(())
    }

    /// Policy of opponent `index` (agent `index + 1`).
    pub fn opponent(&self, index: usize) -> &Policy {
        if self.opponents.len() == 1 {
            &self.opponents[0]
        } else {
            &self.opponents[index]
        }
    }
}

struct Agent {
    id: u32,
    policy: Policy,
    rtts: Option<RttsAgent>,
    private: Memory,
    position: Point,
    rng: Rng,
    occupancy: StateOccupancy,
}

struct Outcome {
    evaluations: u32,
    state: Option<(crate::strategy::FitnessLevel, crate::strategy::FitnessLevel)>,
    action: Option<crate::strategy::S1Action>,
    placement: Option<(crate::strategy::FitnessLevel, MemorySource)>,
    moved: bool,
    visits: Vec<Point>,
}

impl Agent {
    fn step(
        &mut self,
        env: &EnvironmentConfig,
        step: u32,
        landscape: &Landscape,
        public: &Memory,
        pending_visits: &mut PendingVisits,
        pending_public: &mut Vec<MemoryEntry>,
    ) -> Outcome {
        let outcome = match &self.policy {
            Policy::Table(strategy) => {
                let pub_best = *public.best().expect("public memory seeded at initialization");
                let priv_best = *self.private.best().expect("private memory seeded at initialization");
                let levels = (level_of(pub_best.stored_fitness), level_of(priv_best.stored_fitness));
                self.occupancy.record_s1(levels.0, levels.1);
                let action = strategy.select_s1(levels.0, levels.1, &mut self.rng);
                let start = match action.source {
                    MemorySource::Public => pub_best.point,
                    MemorySource::Private => priv_best.point,
                };
                let search = match action.method {
                    SearchMethod::Exploit => exploit_step(landscape, start, &mut self.rng),
                    SearchMethod::Explore => {
                        explore_step(landscape, start, env.explore_range, env.max_jump_attempts, &mut self.rng)
                    }
                };
                let mut placement = None;
                if let Some((point, fitness)) = search.found {
                    self.position = point;
                    let level = level_of(fitness);
                    self.occupancy.record_s2(level);
                    let destination = strategy.select_s2(level, &mut self.rng);
                    let entry = MemoryEntry { point, stored_fitness: fitness, inserted_step: step, owner: self.id };
                    match destination {
                        MemorySource::Public => pending_public.push(entry),
                        MemorySource::Private => self.private.insert(entry),
                    }
                    placement = Some((level, destination));
                }
                let visits = match env.visit_policy {
                    VisitPolicy::AllEvaluations => search.evaluated.clone(),
                    VisitPolicy::AcceptedOnly => search.found.map(|(p, _)| p).into_iter().collect(),
                };
                Outcome {
                    evaluations: search.evaluated.len() as u32,
                    state: Some(levels),
                    action: Some(action),
                    placement,
                    moved: search.found.is_some(),
                    visits,
                }
            }
            Policy::Rtts(_) => {
                let rtts = self.rtts.as_mut().expect("rtts state for rtts policy");
                let tick = rtts.tick(landscape, self.position);
                if let Some(next) = tick.next {
                    self.position = next;
                }
                let visits = match env.visit_policy {
                    VisitPolicy::AllEvaluations => tick.reads.clone(),
                    VisitPolicy::AcceptedOnly => tick.next.into_iter().collect(),
                };
                Outcome {
                    evaluations: tick.reads.len() as u32,
                    state: None,
                    action: None,
                    placement: None,
                    moved: tick.next.is_some(),
                    visits,
                }
            }
        };
        pending_visits.extend(outcome.visits.iter().copied());
        outcome
    }
}

/// A single run in progress.
pub struct Simulation {
    env: EnvironmentConfig,
    landscape: Landscape,
    public: Memory,
    agents: Vec<Agent>,
    order: Vec<usize>,
    step: usize,
    trace: RunTrace,
    pending_visits: PendingVisits,
    pending_public: Vec<MemoryEntry>,
}

impl Simulation {
    /// Builds the landscape and places agents; agent 0 uses `evaluated`.
    pub fn new(env: &EnvironmentConfig, evaluated: &Policy) -> Result<Self, SimError> {
        env.validate()?;
        let table = ContributionTable::random(env.n, env.k, env.seed)?;
        Self::with_landscape(env, Landscape::from_table(table, env.flocking)?, evaluated)
    }

    /// Runs on a caller-supplied landscape instead of one built from
    /// `env.seed`; `env.n` must match it.
    pub fn with_landscape(
        env: &EnvironmentConfig,
        mut landscape: Landscape,
        evaluated: &Policy,
    ) -> Result<Self, SimError> {
        env.validate()?;
        if landscape.n() != env.n {
            return Err(LandscapeError::Length { expected: env.n, got: landscape.n() }.into());
        }
        let mut agents = Vec::with_capacity(env.num_agents);
        for id in 0..env.num_agents {
            let policy = if id == 0 { evaluated.clone() } else { env.opponent(id - 1).clone() };
            let mut rng = seed::rng(env.seed, &[seed::AGENT, id as u64]);
            let position = Point::random(env.n, &mut rng);
            let rtts = match &policy {
                Policy::Rtts(mode) => Some(RttsAgent::new(*mode, env.n)),
                Policy::Table(_) => None,
            };
            agents.push(Agent {
                id: id as u32,
                policy,
                rtts,
                private: Memory::new(),
                position,
                rng,
                occupancy: StateOccupancy::default(),
            });
        }

        let mut public = Memory::new();
        let mut seeds = Vec::new();
        let mut records = Vec::with_capacity((env.steps + 1) * env.num_agents);
        let mut pending_visits = PendingVisits::new();
        for agent in agents.iter_mut() {
            let fitness = landscape.fitness(agent.position);
            let entry =
                MemoryEntry { point: agent.position, stored_fitness: fitness, inserted_step: 0, owner: agent.id };
            agent.private.insert(entry);
            if matches!(agent.policy, Policy::Table(_)) {
                seeds.push(entry);
            }
            pending_visits.record(agent.position);
            records.push(StepRecord {
                step: 0,
                agent: agent.id,
                position: agent.position,
                fitness,
                evaluations: 1,
                state: None,
                action: None,
                placement: None,
                moved: false,
                visits: vec![agent.position],
            });
        }
        seeds.sort_by(MemoryEntry::merge_order);
        for entry in seeds {
            public.insert(entry);
        }
        landscape.apply_visits(&mut pending_visits);

        Ok(Simulation {
            trace: RunTrace { n: env.n, num_agents: env.num_agents, steps: env.steps, seed: env.seed, records },
            order: (0..env.num_agents).collect(),
            env: env.clone(),
            landscape,
            public,
            agents,
            step: 0,
            pending_visits,
            pending_public: Vec::new(),
        })
    }

    /// Changes the order agents are advanced in within a step.
    pub fn set_update_order(&mut self, order: Vec<usize>) -> Result<(), SimError> {
        let mut seen = vec![false; self.agents.len()];
        if order.len() != seen.len() {
            return Err(SimError::Config("update order must be a permutation of agents".into()));
        }
        for &i in &order {
            if i >= seen.len() || core::mem::replace(&mut seen[i], true) {
                return Err(SimError::Config("update order must be a permutation of agents".into()));
            }
        }
        self.order = order;
        Ok(())
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.env.steps
    }

    pub fn current_step(&self) -> usize {
        self.step
    }

    /// Advances every agent one step, then applies visits and public updates.
    pub fn step(&mut self) {
        self.step += 1;
        let step = self.step as u32;
        let mut outcomes: Vec<Option<Outcome>> = (0..self.agents.len()).map(|_| None).collect();
        for &i in &self.order {
            outcomes[i] = Some(self.agents[i].step(
                &self.env,
                step,
                &self.landscape,
                &self.public,
                &mut self.pending_visits,
                &mut self.pending_public,
            ));
        }
        for (agent, outcome) in self.agents.iter().zip(outcomes) {
            let o = outcome.expect("every agent stepped");
            self.trace.records.push(StepRecord {
                step,
                agent: agent.id,
                position: agent.position,
                fitness: self.landscape.fitness(agent.position),
                evaluations: o.evaluations,
                state: o.state,
                action: o.action,
                placement: o.placement,
                moved: o.moved,
                visits: o.visits,
            });
        }
        self.landscape.apply_visits(&mut self.pending_visits);
        self.pending_public.sort_by(MemoryEntry::merge_order);
        for entry in self.pending_public.drain(..) {
            self.public.insert(entry);
        }
    }

    pub fn run(mut self) -> RunTrace {
        while !self.is_finished() {
            self.step();
        }
        self.trace
    }

    pub fn run_to_end(&mut self) {
        while !self.is_finished() {
            self.step();
        }
    }

    pub fn landscape(&self) -> &Landscape {
        &self.landscape
    }

    pub fn public_memory(&self) -> &Memory {
        &self.public
    }

    pub fn private_memory(&self, agent: usize) -> &Memory {
        &self.agents[agent].private
    }

    pub fn position(&self, agent: usize) -> Point {
        self.agents[agent].position
    }

    pub fn occupancy(&self, agent: usize) -> StateOccupancy {
        self.agents[agent].occupancy
    }

    pub fn trace(&self) -> &RunTrace {
        &self.trace
    }

    pub fn into_trace(self) -> RunTrace {
        self.trace
    }
}

/// Runs one simulation to completion.
pub fn run_simulation(env: &EnvironmentConfig, evaluated: &Policy) -> Result<RunTrace, SimError> {
    Ok(Simulation::new(env, evaluated)?.run())
}

/// Seed of run `index` under master seed `master`.
pub fn run_seed(master: u64, index: usize) -> u64 {
    seed::derive(master, &[seed::RUN, index as u64])
}

/// Performance of agent 0 in run `index` of `env` (whose seed is the master).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub performance: f64,
    pub mean_evaluations: f64,
}

pub fn run_once(env: &EnvironmentConfig, policy: &Policy, index: usize) -> Result<RunSummary, SimError> {
    if env.steps == 0 {
        return Err(SimError::Config("performance needs at least one step".into()));
    }
    let seed = run_seed(env.seed, index);
    let trace = run_simulation(&env.with_seed(seed), policy)?;
    Ok(RunSummary { seed, performance: trace.performance(0), mean_evaluations: trace.mean_evaluations(0) })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PerformanceStats {
    pub runs: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub std_err: f64,
    pub mean_evaluations: f64,
    pub samples: Vec<f64>,
}

impl PerformanceStats {
    pub fn from_runs(runs: &[RunSummary]) -> Self {
        let samples: Vec<f64> = runs.iter().map(|r| r.performance).collect();
        let count = samples.len();
        let mean = crate::analysis::mean(&samples);
        let std_dev = crate::analysis::sample_std_dev(&samples);
        let mean_evaluations = crate::analysis::mean(&runs.iter().map(|r| r.mean_evaluations).collect::<Vec<_>>());
        PerformanceStats {
            runs: count,
            mean,
            std_dev,
            std_err: if count > 0 { std_dev / libm::sqrt(count as f64) } else { f64::NAN },
            mean_evaluations,
            samples,
        }
    }
}

/// Mean, spread and standard error of agent 0's performance over
/// `repeats` runs, each on a fresh landscape derived from `env.seed`.
pub fn evaluate_strategy(
    policy: &Policy,
    env: &EnvironmentConfig,
    repeats: usize,
) -> Result<PerformanceStats, SimError> {
    if repeats == 0 {
        return Err(SimError::Config("repeats must be at least 1".into()));
    }
    let runs = (0..repeats).map(|r| run_once(env, policy, r)).collect::<Result<Vec<_>, _>>()?;
    Ok(PerformanceStats::from_runs(&runs))
}
