//! Distance, crossover and mutation operators on CPPN genomes.

use alloc::vec::Vec;

use rand::Rng as _;

use super::innovation::InnovationRegistry;
use super::NeatConfig;
use crate::cppn::{Activation, Genome, LinkGene, NodeGene, NodeKind, BIAS_ID};
use crate::seed::Rng;

/// Gene-count breakdown behind a compatibility distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub matching: usize,
    pub disjoint: usize,
    pub excess: usize,
    /// Mean absolute weight difference over matching links (0 if none).
    pub mean_weight_difference: f64,
}

pub fn align(a: &Genome, b: &Genome) -> Alignment {
    let (la, lb) = (a.links(), b.links());
    let max_a = la.last().map(|l| l.innovation);
    let max_b = lb.last().map(|l| l.innovation);
    let (mut i, mut j) = (0, 0);
    let (mut matching, mut disjoint, mut excess, mut wsum) = (0usize, 0usize, 0usize, 0.0);
    let beyond = |innov: u64, other_max: Option<u64>| other_max.is_none_or(|m| innov > m);
    while i < la.len() || j < lb.len() {
        match (la.get(i), lb.get(j)) {
            (Some(x), Some(y)) if x.innovation == y.innovation => {
                matching += 1;
                wsum += libm::fabs(x.weight - y.weight);
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x.innovation < y.innovation => {
                if beyond(x.innovation, max_b) {
                    excess += 1
                } else {
                    disjoint += 1
                }
                i += 1;
            }
            (Some(x), None) => {
                if beyond(x.innovation, max_b) {
                    excess += 1
                } else {
                    disjoint += 1
                }
                i += 1;
            }
            (_, Some(y)) => {
                if beyond(y.innovation, max_a) {
                    excess += 1
                } else {
                    disjoint += 1
                }
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    let mean_weight_difference = if matching == 0 { 0.0 } else { wsum / matching as f64 };
    Alignment { matching, disjoint, excess, mean_weight_difference }
}

/// `c_E E + c_D D + c_W W̄` with raw (unnormalized) gene counts.
pub fn compatibility(a: &Genome, b: &Genome, config: &NeatConfig) -> f64 {
    let al = align(a, b);
    config.excess_coefficient * al.excess as f64
        + config.disjoint_coefficient * al.disjoint as f64
        + config.weight_difference_coefficient * al.mean_weight_difference
}

pub fn random_weight(rng: &mut Rng, power: f64) -> f64 {
    if power == 0.0 {
        0.0
    } else {
        rng.random_range(-power..=power)
    }
}

/// Fully connected inputs and bias to outputs with uniform random weights.
pub fn initial_genome(rng: &mut Rng, config: &NeatConfig) -> Genome {
    let weights: [f64; 10] = core::array::from_fn(|_| random_weight(rng, config.mutation_power));
    Genome::minimal(weights)
}

/// Child of `fitter` and `other`. Matching genes take either parent's
/// weight at random; disjoint and excess genes come from `fitter`, so the
/// child's topology is `fitter`'s.
pub fn crossover(fitter: &Genome, other: &Genome, rng: &mut Rng, config: &NeatConfig) -> Genome {
    let nodes: Vec<NodeGene> = fitter
        .nodes()
        .iter()
        .map(|n| match other.node(n.id) {
            Some(m) if rng.random_bool(0.5) => NodeGene { activation: m.activation, ..*n },
            _ => *n,
        })
        .collect();
    let links: Vec<LinkGene> = fitter
        .links()
        .iter()
        .map(|l| match other.link(l.innovation) {
            Some(m) => {
                let weight = if rng.random_bool(0.5) { l.weight } else { m.weight };
                let enabled =
                    if l.enabled && m.enabled { true } else { !rng.random_bool(config.disabled_gene_inherit_prob) };
                LinkGene { weight, enabled, ..*l }
            }
            None => *l,
        })
        .collect();
    fitter.with_genes(nodes, links).expect("crossover keeps the fitter parent's topology")
}

fn random_activation(rng: &mut Rng, config: &NeatConfig) -> Activation {
    let set = &config.activations;
    set[rng.random_range(0..set.len())]
}

/// Splits a random enabled link. Returns whether the genome changed.
pub fn mutate_add_node(
    genome: &mut Genome,
    registry: &mut InnovationRegistry,
    rng: &mut Rng,
    config: &NeatConfig,
) -> bool {
    let enabled: Vec<usize> = (0..genome.links().len()).filter(|&i| genome.links()[i].enabled).collect();
    if enabled.is_empty() {
        return false;
    }
    let old = genome.links()[enabled[rng.random_range(0..enabled.len())]];
    let split = registry.split(old.from, old.to);
    if genome.node(split.node).is_some() {
        return false;
    }
    let mut nodes = genome.nodes().to_vec();
    nodes.push(NodeGene { id: split.node, kind: NodeKind::Hidden, activation: random_activation(rng, config) });
    let mut links = genome.links().to_vec();
    for l in links.iter_mut().filter(|l| l.innovation == old.innovation) {
        l.enabled = false;
    }
    links.push(LinkGene { innovation: split.in_link, from: old.from, to: split.node, weight: 1.0, enabled: true });
    links.push(LinkGene {
        innovation: split.out_link,
        from: split.node,
        to: old.to,
        weight: old.weight,
        enabled: true,
    });
    if config.add_bias_to_hidden_nodes && old.from != BIAS_ID {
        links.push(LinkGene { innovation: split.bias_link, from: BIAS_ID, to: split.node, weight: 0.0, enabled: true });
    }
    match genome.with_genes(nodes, links) {
        Ok(g) => {
            *genome = g;
            true
        }
        Err(_) => false,
    }
}

/// Connects a random unconnected pair without creating a cycle.
pub fn mutate_add_link(
    genome: &mut Genome,
    registry: &mut InnovationRegistry,
    rng: &mut Rng,
    config: &NeatConfig,
) -> bool {
    let mut candidates = Vec::new();
    for from in genome.nodes().iter().filter(|n| n.kind != NodeKind::Output) {
        for to in genome.nodes().iter().filter(|n| n.kind.is_computed()) {
            if !genome.has_link_between(from.id, to.id) && !genome.would_cycle(from.id, to.id) {
                candidates.push((from.id, to.id));
            }
        }
    }
    if candidates.is_empty() {
        return false;
    }
    let (from, to) = candidates[rng.random_range(0..candidates.len())];
    let innovation = registry.link(from, to);
    if genome.link(innovation).is_some() {
        return false;
    }
    let mut links = genome.links().to_vec();
    links.push(LinkGene { innovation, from, to, weight: random_weight(rng, config.mutation_power), enabled: true });
    match genome.with_genes(genome.nodes().to_vec(), links) {
        Ok(g) => {
            *genome = g;
            true
        }
        Err(_) => false,
    }
}

/// Perturbs each link with probability `mutate_link_prob`.
pub fn mutate_weights(genome: &mut Genome, rng: &mut Rng, config: &NeatConfig) -> bool {
    let mut changed = false;
    for l in genome.links_mut() {
        if rng.random_bool(config.mutate_link_prob) {
            l.weight += random_weight(rng, config.mutation_power);
            changed = true;
        }
    }
    changed
}

/// Gives a random hidden or output node a random activation function.
pub fn mutate_activation(genome: &mut Genome, rng: &mut Rng, config: &NeatConfig) -> bool {
    let computed: Vec<usize> = (0..genome.nodes().len()).filter(|&i| genome.nodes()[i].kind.is_computed()).collect();
    if computed.is_empty() {
        return false;
    }
    let i = computed[rng.random_range(0..computed.len())];
    let a = random_activation(rng, config);
    let node = &mut genome.nodes_mut()[i];
    let changed = node.activation != a;
    node.activation = a;
    changed
}

/// Removes a random link gene.
pub fn mutate_demolish_link(genome: &mut Genome, rng: &mut Rng) -> bool {
    if genome.links().is_empty() {
        return false;
    }
    let mut links = genome.links().to_vec();
    links.remove(rng.random_range(0..links.len()));
    *genome = genome.with_genes(genome.nodes().to_vec(), links).expect("removing a link keeps a genome valid");
    true
}

/// One round of mutation: a structural change, or else the independent
/// weight, activation and demolition operators.
pub fn mutate(genome: &mut Genome, registry: &mut InnovationRegistry, rng: &mut Rng, config: &NeatConfig) {
    if rng.random_bool(config.mutate_add_node_prob) {
        mutate_add_node(genome, registry, rng, config);
    } else if rng.random_bool(config.mutate_add_link_prob) {
        mutate_add_link(genome, registry, rng, config);
    } else {
        if rng.random_bool(config.mutate_link_weights_prob) {
            mutate_weights(genome, rng, config);
        }
        if rng.random_bool(config.mutate_node_prob) {
            mutate_activation(genome, rng, config);
        }
        if rng.random_bool(config.mutate_demolish_link_prob) {
            mutate_demolish_link(genome, rng);
        }
    }
}
