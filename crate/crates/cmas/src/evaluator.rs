use cmas_core::cppn::{Genome, Squash};
use cmas_core::neat::{genome_fitness, FitnessEvaluator, NeatError};
use cmas_core::simulation::EnvironmentConfig;
use rayon::prelude::*;

/// Scores genomes on the rayon pool. Results match the sequential
/// evaluator exactly: each genome's runs depend only on the batch seed.
#[derive(Debug, Clone)]
pub struct ParallelEvaluator {
    pub environments: Vec<EnvironmentConfig>,
    pub runs_per_eval: usize,
    pub squash: Squash,
}

impl FitnessEvaluator for ParallelEvaluator {
    fn evaluate(&self, genomes: &[Genome], batch_seed: u64) -> Result<Vec<f64>, NeatError> {
        if self.environments.is_empty() {
            return Err(NeatError::NoEnvironments);
        }
        genomes
            .par_iter()
            .map(|g| Ok(genome_fitness(g, &self.environments, self.runs_per_eval, self.squash, batch_seed)?))
            .collect()
    }
}
