//! NEAT evolution of CPPN genomes.
//!
//! Generation `g` draws all its randomness from a stream derived from the
//! master seed and `g`, so a saved [`Evolution`] resumes bit-identically
//! without any RNG state. Every genome in a generation is scored on the same
//! batch of landscape seeds.

mod genetics;
mod innovation;
mod species;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng as _;

pub use genetics::{
    align, compatibility, crossover, initial_genome, mutate, mutate_activation, mutate_add_link, mutate_add_node,
    mutate_demolish_link, mutate_weights, random_weight, Alignment,
};
pub use innovation::{InnovationRegistry, NodeSplit};
pub use species::{adjusted_fitness, offspring_quotas, record_fitness, speciate, Species};

use crate::cppn::{decode_strategy, Activation, Genome, Squash, FIRST_HIDDEN_ID};
use crate::seed;
use crate::simulation::{run_once, EnvironmentConfig, Policy, SimError};

/// Parameters with no clear counterpart here; accepted and ignored.
pub const UNMAPPED_PARAMETERS: [&str; 11] = [
    "AdultLinkAge",
    "AllowAddNodeToRecurrentConnection",
    "AllowSelfRecurrentConnections",
    "CompatibilityModifier",
    "ExtraActivationFunctions",
    "ExtraActivationUpdates",
    "FitnessCoefficient",
    "LinkGeneMinimumWeightForPhentoype",
    "MutateSpeciesChampionProbability",
    "OnlyGaussianHiddenNodes",
    "SpeciesSizeTarget",
];

/// How landscape seeds for fitness evaluation are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EvaluationSeeds {
    /// One batch for the whole run, so a copied champion keeps its score.
    #[default]
    Fixed,
    /// A fresh batch every generation.
    PerGeneration,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NeatConfig {
    pub population_size: usize,
    pub generations: usize,
    pub compatibility_threshold: f64,
    pub disjoint_coefficient: f64,
    pub excess_coefficient: f64,
    pub weight_difference_coefficient: f64,
    pub survival_threshold: f64,
    pub mutate_add_node_prob: f64,
    pub mutate_add_link_prob: f64,
    pub mutate_link_weights_prob: f64,
    /// Per-link perturbation chance once weights are mutated.
    pub mutate_link_prob: f64,
    /// Chance of changing one node's activation function.
    pub mutate_node_prob: f64,
    pub mutate_demolish_link_prob: f64,
    pub mutate_only_prob: f64,
    pub mutation_power: f64,
    pub dropoff_age: u32,
    pub age_significance: f64,
    pub force_copy_champion: bool,
    pub smallest_species_elitism: usize,
    pub add_bias_to_hidden_nodes: bool,
    /// Chance an inherited gene stays disabled when either parent disabled it.
    pub disabled_gene_inherit_prob: f64,
    pub activations: Vec<Activation>,
    pub squash: Squash,
    pub runs_per_eval: usize,
    pub evaluation_seeds: EvaluationSeeds,
}

impl Default for NeatConfig {
    fn default() -> Self {
        NeatConfig {
            population_size: 100,
            generations: 500,
            compatibility_threshold: 20.0,
            disjoint_coefficient: 1.0,
            excess_coefficient: 1.0,
            weight_difference_coefficient: 0.8,
            survival_threshold: 0.2,
            mutate_add_node_prob: 0.2,
            mutate_add_link_prob: 0.2,
            mutate_link_weights_prob: 0.8,
            mutate_link_prob: 0.2,
            mutate_node_prob: 0.05,
            mutate_demolish_link_prob: 0.04,
            mutate_only_prob: 0.5,
            mutation_power: 2.0,
            dropoff_age: 10,
            age_significance: 1.2,
            force_copy_champion: true,
            smallest_species_elitism: 1,
            add_bias_to_hidden_nodes: true,
            disabled_gene_inherit_prob: 0.75,
            activations: Activation::ALL.to_vec(),
            squash: Squash::Logistic,
            runs_per_eval: 8,
            evaluation_seeds: EvaluationSeeds::Fixed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NeatError {
    #[error("invalid NEAT configuration: {0}")]
    Config(String),
    #[error("no environments to evaluate in")]
    NoEnvironments,
    #[error("evaluator returned {got} scores for {expected} genomes")]
    ScoreCount { expected: usize, got: usize },
    #[error(transparent)]
    Simulation(#[from] SimError),
}

impl NeatConfig {
    pub fn validate(&self) -> Result<(), NeatError> {
        let probs = [
            ("survival_threshold", self.survival_threshold),
            ("mutate_add_node_prob", self.mutate_add_node_prob),
            ("mutate_add_link_prob", self.mutate_add_link_prob),
            ("mutate_link_weights_prob", self.mutate_link_weights_prob),
            ("mutate_link_prob", self.mutate_link_prob),
            ("mutate_node_prob", self.mutate_node_prob),
            ("mutate_demolish_link_prob", self.mutate_demolish_link_prob),
            ("mutate_only_prob", self.mutate_only_prob),
            ("disabled_gene_inherit_prob", self.disabled_gene_inherit_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(NeatError::Config(format!("{name} = {p} is not a probability")));
            }
        }
        if self.population_size < 2 {
            return Err(NeatError::Config("population_size must be at least 2".into()));
        }
        if self.activations.is_empty() {
            return Err(NeatError::Config("activation set is empty".into()));
        }
        if self.runs_per_eval == 0 {
            return Err(NeatError::Config("runs_per_eval must be at least 1".into()));
        }
        if !(self.mutation_power >= 0.0 && self.mutation_power.is_finite()) {
            return Err(NeatError::Config("mutation_power must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// Scores a generation. Implementations may evaluate genomes in parallel
/// but must return scores in input order.
pub trait FitnessEvaluator {
    fn evaluate(&self, genomes: &[Genome], batch_seed: u64) -> Result<Vec<f64>, NeatError>;
}

/// Mean performance of the decoded strategy over `runs` runs in each
/// environment, averaged over environments. Run `r` in environment `e` uses
/// the same landscape for every genome given the same `batch_seed`.
pub fn genome_fitness(
    genome: &Genome,
    environments: &[EnvironmentConfig],
    runs: usize,
    squash: Squash,
    batch_seed: u64,
) -> Result<f64, SimError> {
    let policy = Policy::Table(decode_strategy(genome, squash, "genome"));
    let mut total = 0.0;
    for (e, env) in environments.iter().enumerate() {
        let env = env.with_seed(seed::derive(batch_seed, &[seed::EVALUATION, e as u64]));
        let mut sum = 0.0;
        for r in 0..runs {
            sum += run_once(&env, &policy, r)?.performance;
        }
        total += sum / runs as f64;
    }
    Ok(total / environments.len() as f64)
}

/// Sequential evaluator over a fixed list of environments.
#[derive(Debug, Clone)]
pub struct SimulationEvaluator {
    pub environments: Vec<EnvironmentConfig>,
    pub runs_per_eval: usize,
    pub squash: Squash,
}

impl FitnessEvaluator for SimulationEvaluator {
    fn evaluate(&self, genomes: &[Genome], batch_seed: u64) -> Result<Vec<f64>, NeatError> {
        if self.environments.is_empty() {
            return Err(NeatError::NoEnvironments);
        }
        genomes
            .iter()
            .map(|g| Ok(genome_fitness(g, &self.environments, self.runs_per_eval, self.squash, batch_seed)?))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub species: usize,
    pub best_hidden_nodes: usize,
    pub best_enabled_links: usize,
}

/// Population state between generations.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Evolution {
    pub config: NeatConfig,
    pub seed: u64,
    /// Index of the next generation to evaluate.
    pub generation: usize,
    pub population: Vec<Genome>,
    pub species: Vec<Species>,
    pub next_species_id: u32,
    pub registry: InnovationRegistry,
    pub best: Option<(Genome, f64)>,
    pub history: Vec<GenerationStats>,
}

/// Outcome of a finished evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub best: Genome,
    pub best_fitness: f64,
    pub history: Vec<GenerationStats>,
}

impl Evolution {
    pub fn new(config: NeatConfig, seed: u64) -> Result<Self, NeatError> {
        config.validate()?;
        let mut rng = seed::rng(seed, &[seed::POPULATION]);
        let population = (0..config.population_size).map(|_| initial_genome(&mut rng, &config)).collect();
        Ok(Evolution {
            config,
            seed,
            generation: 0,
            population,
            species: Vec::new(),
            next_species_id: 0,
            registry: InnovationRegistry::new(10, FIRST_HIDDEN_ID),
            best: None,
            history: Vec::new(),
        })
    }

    pub fn is_finished(&self) -> bool {
        self.generation > self.config.generations
    }

    pub fn batch_seed(&self, generation: usize) -> u64 {
        match self.config.evaluation_seeds {
            EvaluationSeeds::Fixed => seed::derive(self.seed, &[seed::EVALUATION]),
            EvaluationSeeds::PerGeneration => seed::derive(self.seed, &[seed::EVALUATION, generation as u64]),
        }
    }

    /// Evaluates the current generation and, unless it was the last,
    /// breeds the next one.
    pub fn step<E: FitnessEvaluator + ?Sized>(&mut self, evaluator: &E) -> Result<GenerationStats, NeatError> {
        let fitness = evaluator.evaluate(&self.population, self.batch_seed(self.generation))?;
        if fitness.len() != self.population.len() {
            return Err(NeatError::ScoreCount { expected: self.population.len(), got: fitness.len() });
        }
        speciate(&self.population, &mut self.species, &mut self.next_species_id, &self.config);
        record_fitness(&mut self.species, &fitness);

        let champion = (0..fitness.len())
            .max_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(b.cmp(&a)))
            .expect("population is nonempty");
        let champ = &self.population[champion];
        let stats = GenerationStats {
            generation: self.generation,
            best_fitness: fitness[champion],
            mean_fitness: fitness.iter().sum::<f64>() / fitness.len() as f64,
            species: self.species.len(),
            best_hidden_nodes: champ.hidden_count(),
            best_enabled_links: champ.enabled_link_count(),
        };
        if self.best.as_ref().is_none_or(|(_, f)| fitness[champion] > *f) {
            self.best = Some((champ.clone(), fitness[champion]));
        }
        self.history.push(stats);

        if self.generation < self.config.generations {
            let mut rng = seed::rng(self.seed, &[seed::GENERATION, self.generation as u64]);
            self.registry.begin_generation();
            self.population = reproduce(
                &self.population,
                &fitness,
                &self.species,
                champion,
                &mut self.registry,
                &mut rng,
                &self.config,
            );
        }
        self.generation += 1;
        Ok(stats)
    }

    pub fn run<E: FitnessEvaluator + ?Sized>(mut self, evaluator: &E) -> Result<EvolutionResult, NeatError> {
        while !self.is_finished() {
            self.step(evaluator)?;
        }
        let (best, best_fitness) = self.best.expect("at least one generation evaluated");
        Ok(EvolutionResult { best, best_fitness, history: self.history })
    }
}

/// Breeds the next population from evaluated species.
pub fn reproduce(
    population: &[Genome],
    fitness: &[f64],
    species: &[Species],
    champion: usize,
    registry: &mut InnovationRegistry,
    rng: &mut seed::Rng,
    config: &NeatConfig,
) -> Vec<Genome> {
    let quotas = offspring_quotas(species, fitness, champion, config);
    let mut next = Vec::with_capacity(config.population_size);
    let by_fitness = |a: &usize, b: &usize| fitness[*b].total_cmp(&fitness[*a]).then(a.cmp(b));
    for (s, &quota) in species.iter().zip(&quotas) {
        if quota == 0 {
            continue;
        }
        let mut ranked = s.members.clone();
        ranked.sort_by(by_fitness);
        let parents =
            &ranked[..(libm::ceil(config.survival_threshold * ranked.len() as f64) as usize).clamp(1, ranked.len())];
        let mut made = 0;
        let elite = if ranked.contains(&champion) {
            config.force_copy_champion
        } else {
            ranked.len() >= config.smallest_species_elitism.max(1)
        };
        if elite {
            next.push(population[ranked[0]].clone());
            made += 1;
        }
        while made < quota {
            let mut child = if parents.len() == 1 || rng.random_bool(config.mutate_only_prob) {
                population[parents[rng.random_range(0..parents.len())]].clone()
            } else {
                let a = parents[rng.random_range(0..parents.len())];
                let b = parents[rng.random_range(0..parents.len())];
                let (fitter, other) = if by_fitness(&a, &b).is_le() { (a, b) } else { (b, a) };
                crossover(&population[fitter], &population[other], rng, config)
            };
            mutate(&mut child, registry, rng, config);
            next.push(child);
            made += 1;
        }
    }
    debug_assert_eq!(next.len(), config.population_size);
    next
}

/// Evolves a population against `environments` and returns the best genome
/// seen with per-generation statistics.
pub fn evolve(
    environments: &[EnvironmentConfig],
    config: &NeatConfig,
    seed: u64,
) -> Result<EvolutionResult, NeatError> {
    if environments.is_empty() {
        return Err(NeatError::NoEnvironments);
    }
    for env in environments {
        env.validate()?;
    }
    let evaluator = SimulationEvaluator {
        environments: environments.to_vec(),
        runs_per_eval: config.runs_per_eval,
        squash: config.squash,
    };
    Evolution::new(config.clone(), seed)?.run(&evaluator)
}
