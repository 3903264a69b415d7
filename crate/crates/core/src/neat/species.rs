use alloc::vec::Vec;

use super::genetics::compatibility;
use super::NeatConfig;
use crate::cppn::Genome;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Species {
    pub id: u32,
    pub representative: Genome,
    /// Population indices of the current members.
    pub members: Vec<usize>,
    /// Best raw fitness ever reached by a member.
    pub best_fitness: f64,
    /// Generations since the species appeared.
    pub age: u32,
    /// Generations since `best_fitness` last improved.
    pub stagnation: u32,
}

/// Assigns every genome to the first species whose representative is within
/// the compatibility threshold, founding new species as needed. Empty
/// species are dropped and each survivor's representative becomes its first
/// member.
pub fn speciate(population: &[Genome], species: &mut Vec<Species>, next_id: &mut u32, config: &NeatConfig) {
    for s in species.iter_mut() {
        s.members.clear();
    }
    for (i, g) in population.iter().enumerate() {
        match species.iter_mut().find(|s| compatibility(g, &s.representative, config) < config.compatibility_threshold)
        {
            Some(s) => s.members.push(i),
            None => {
                species.push(Species {
                    id: *next_id,
                    representative: g.clone(),
                    members: alloc::vec![i],
                    best_fitness: f64::NEG_INFINITY,
                    age: 0,
                    stagnation: 0,
                });
                *next_id += 1;
            }
        }
    }
    species.retain(|s| !s.members.is_empty());
    for s in species.iter_mut() {
        s.representative = population[s.members[0]].clone();
    }
}

/// Updates best-fitness, stagnation and age after evaluation.
pub fn record_fitness(species: &mut [Species], fitness: &[f64]) {
    for s in species {
        let best = s.members.iter().map(|&i| fitness[i]).fold(f64::NEG_INFINITY, f64::max);
        if best > s.best_fitness {
            s.best_fitness = best;
            s.stagnation = 0;
        } else {
            s.stagnation += 1;
        }
        s.age += 1;
    }
}

/// Fitness divided by species size, boosted for young species.
pub fn adjusted_fitness(species: &[Species], fitness: &[f64], config: &NeatConfig) -> Vec<f64> {
    let mut adjusted = alloc::vec![0.0; fitness.len()];
    for s in species {
        let boost = if s.age < config.dropoff_age { config.age_significance } else { 1.0 };
        for &i in &s.members {
            adjusted[i] = fitness[i].max(0.0) * boost / s.members.len() as f64;
        }
    }
    adjusted
}

/// Offspring count per species, summing to the population size.
///
/// Stagnant species (no improvement for more than `dropoff_age`
/// generations) get nothing unless they are the only species or hold the
/// population champion. Shares follow summed adjusted fitness with
/// largest-remainder rounding; the champion's species gets at least one.
pub fn offspring_quotas(species: &[Species], fitness: &[f64], champion: usize, config: &NeatConfig) -> Vec<usize> {
    let total = config.population_size;
    let adjusted = adjusted_fitness(species, fitness, config);
    let holds_champion = |s: &Species| s.members.contains(&champion);
    let eligible: Vec<bool> =
        species.iter().map(|s| species.len() == 1 || holds_champion(s) || s.stagnation <= config.dropoff_age).collect();
    let mut shares: Vec<f64> = species
        .iter()
        .zip(&eligible)
        .map(|(s, &ok)| if ok { s.members.iter().map(|&i| adjusted[i]).sum() } else { 0.0 })
        .collect();
    let sum: f64 = shares.iter().sum();
    if sum.is_nan() || sum <= 0.0 {
        shares = species.iter().zip(&eligible).map(|(s, &ok)| if ok { s.members.len() as f64 } else { 0.0 }).collect();
    }
    let sum: f64 = shares.iter().sum();
    let exact: Vec<f64> = shares.iter().map(|s| s / sum * total as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|&e| libm::floor(e) as usize).collect();
    let mut order: Vec<usize> = (0..species.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - quotas[a] as f64, exact[b] - quotas[b] as f64);
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut assigned: usize = quotas.iter().sum();
    for &i in order.iter().cycle() {
        if assigned >= total {
            break;
        }
        if eligible[i] {
            quotas[i] += 1;
            assigned += 1;
        }
    }
    if let Some(c) = species.iter().position(holds_champion) {
        if quotas[c] == 0 {
            let donor = (0..quotas.len()).max_by_key(|&i| (quotas[i], core::cmp::Reverse(i))).expect("nonempty");
            quotas[donor] -= 1;
            quotas[c] = 1;
        }
    }
    quotas
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cppn::{Activation, LinkGene, NodeGene, NodeKind};

    fn far_genome() -> Genome {
        // 25 extra hidden links make it > 20 away from a minimal genome.
        let base = Genome::minimal([0.0; 10]);
        let mut nodes = base.nodes().to_vec();
        let mut links = base.links().to_vec();
        for k in 0..25u32 {
            nodes.push(NodeGene { id: 7 + k, kind: NodeKind::Hidden, activation: Activation::Linear });
            links.push(LinkGene { innovation: 100 + k as u64, from: 0, to: 7 + k, weight: 0.0, enabled: true });
        }
        Genome::new(nodes, links).unwrap()
    }

    #[test]
    fn identical_population_is_one_species() {
        let c = NeatConfig { population_size: 6, ..NeatConfig::default() };
        let pop = alloc::vec![Genome::minimal([0.3; 10]); 6];
        let mut sp = Vec::new();
        let mut id = 0;
        speciate(&pop, &mut sp, &mut id, &c);
        assert_eq!(sp.len(), 1);
        let fit = [0.6; 6];
        let adj = adjusted_fitness(&sp, &fit, &NeatConfig { age_significance: 1.0, ..c.clone() });
        assert!(adj.iter().all(|&a| (a - 0.1).abs() < 1e-12));
        assert_eq!(offspring_quotas(&sp, &fit, 0, &c), [6]);
    }

    #[test]
    fn two_clusters_two_species_and_quotas_sum() {
        let c = NeatConfig { population_size: 7, ..NeatConfig::default() };
        let mut pop = alloc::vec![Genome::minimal([0.3; 10]); 4];
        pop.extend(core::iter::repeat_n(far_genome(), 3));
        let mut sp = Vec::new();
        let mut id = 0;
        speciate(&pop, &mut sp, &mut id, &c);
        assert_eq!(sp.len(), 2);
        assert_eq!(sp[0].members, [0, 1, 2, 3]);
        assert_eq!(sp[1].members, [4, 5, 6]);
        let fit = [0.1, 0.2, 0.1, 0.1, 0.9, 0.8, 0.7];
        let q = offspring_quotas(&sp, &fit, 4, &c);
        assert_eq!(q.iter().sum::<usize>(), 7);
        assert!(q[1] > q[0]);
    }

    #[test]
    fn stagnant_species_lose_quota_unless_champion() {
        let c = NeatConfig { population_size: 10, ..NeatConfig::default() };
        let mut pop = alloc::vec![Genome::minimal([0.3; 10]); 5];
        pop.extend(core::iter::repeat_n(far_genome(), 5));
        let mut sp = Vec::new();
        let mut id = 0;
        speciate(&pop, &mut sp, &mut id, &c);
        sp[0].stagnation = c.dropoff_age + 1;
        let fit = [0.5; 10];
        assert_eq!(offspring_quotas(&sp, &fit, 9, &c), [0, 10]);
        assert_eq!(offspring_quotas(&sp, &fit, 0, &c)[0], 5);
    }
}
