#![allow(dead_code)]

use cmas_core::cppn::Genome;
use cmas_core::landscape::{ContributionTable, Point};
use cmas_core::neat::{initial_genome, mutate, InnovationRegistry, NeatConfig};
use cmas_core::seed;

/// A genome grown by `steps` rounds of mutation with boosted structural
/// rates, so hidden nodes and extra links are common.
pub fn random_genome(seed_value: u64, steps: usize) -> Genome {
    let config = NeatConfig {
        mutate_add_node_prob: 0.3,
        mutate_add_link_prob: 0.5,
        mutate_node_prob: 0.5,
        ..NeatConfig::default()
    };
    let mut rng = seed::rng(seed_value, &[7]);
    let mut registry = InnovationRegistry::new(10, 7);
    let mut g = initial_genome(&mut rng, &config);
    for _ in 0..steps {
        registry.begin_generation();
        mutate(&mut g, &mut registry, &mut rng, &config);
    }
    g
}

/// Textbook NK fitness straight from the table, bit by bit.
pub fn brute_force_fitness(table: &ContributionTable, point: Point) -> f64 {
    let n = table.n();
    let k = table.k();
    let bits: Vec<bool> = point.iter_bits().collect();
    let mut total = 0.0;
    for i in 0..n {
        let mut key = 0usize;
        for j in 0..=k {
            key = key * 2 + bits[(i + j) % n] as usize;
        }
        total += table.entries()[i * (1 << (k + 1)) + key];
    }
    total / n as f64
}

pub fn all_points(n: usize) -> impl Iterator<Item = Point> {
    (0..1u32 << n).map(move |b| Point::new(n, b).unwrap())
}
