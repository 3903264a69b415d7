mod common;

use cmas_core::catalog::ManualStrategy;
use cmas_core::landscape::{ContributionTable, FlockingConfig, Landscape, Point};
use cmas_core::rtts::RttsMode;
use cmas_core::seed;
use cmas_core::simulation::{
    evaluate_strategy, exploit_in_order, explore_step, run_simulation, EnvironmentConfig, Policy, Simulation,
    VisitPolicy,
};
use cmas_core::strategy::{S1Table, S2Table, Strategy};
use common::all_points;
use proptest::prelude::*;
use proptest::strategy::Strategy as _;

fn manual(name: &str) -> Policy {
    Policy::Table(ManualStrategy::by_name(name).unwrap().strategy())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// K = 0 table where `d` scores `high[d]` at bit 1 and `low[d]` at bit 0.
fn separable(low: &[f64], high: &[f64]) -> Landscape {
    let n = low.len();
    let entries: Vec<f64> = (0..n).flat_map(|d| [low[d], high[d]]).collect();
    Landscape::from_table(ContributionTable::from_entries(n, 0, entries).unwrap(), FlockingConfig::disabled()).unwrap()
}

#[test]
fn single_improving_neighbor_is_found_under_every_order() {
    for n in 2..=5 {
        // start 00..0 is beaten only by flipping the last dimension
        let mut low = vec![0.5; n];
        let mut high = vec![0.1; n];
        low[n - 1] = 0.2;
        high[n - 1] = 0.9;
        let l = separable(&low, &high);
        let start = Point::zero(n);
        for order in permutations(n) {
            let out = exploit_in_order(&l, start, &order);
            assert_eq!(out.found.unwrap().0, start.flip(n - 1));
            let slot = order.iter().position(|&d| d == n - 1).unwrap();
            assert_eq!(out.evaluated.len(), slot + 1);
        }
    }
}

#[test]
fn explore_hit_rate_matches_closed_form() {
    // Constant landscape with one raised point at distance 6 from start.
    let n = 8;
    let start = Point::zero(n);
    let target = Point::new(n, 0b0011_1111).unwrap();
    // Flat table; a radius-0 boost lifts only the target.
    let entries = vec![0.5; n * 2 * 2];
    let mut l = Landscape::from_table(
        ContributionTable::from_entries(n, 1, entries).unwrap(),
        FlockingConfig { radius: 0, ..FlockingConfig::default() },
    )
    .unwrap();
    let mut pending = cmas_core::PendingVisits::new();
    pending.record(target);
    l.apply_visits(&mut pending);
    assert!(l.fitness(target) > l.fitness(start));

    let (attempts, trials) = (3usize, 40_000usize);
    let (lo, hi) = (4usize, 8usize); // ceil(0.5 * 8) ..= 8
    let binom = |n: u64, k: u64| (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1));
    let p1 = 1.0 / (hi - lo + 1) as f64 / binom(8, 6) as f64;
    let p = 1.0 - (1.0 - p1).powi(attempts as i32);
    let mut rng = seed::rng(2024, &[]);
    let hits = (0..trials).filter(|_| explore_step(&l, start, (0.5, 1.0), attempts, &mut rng).found.is_some()).count();
    let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
    assert!((hits as f64 - trials as f64 * p).abs() < 4.0 * sigma, "hits {hits}, expected {}", trials as f64 * p);
}

#[test]
fn lone_hill_climber_reaches_the_k0_optimum() {
    for seed_value in 0..10u64 {
        let n = 10;
        let mut env = EnvironmentConfig::standard(n, vec![]);
        env.k = 0;
        env.num_agents = 1;
        env.steps = 3 * n;
        env.flocking = FlockingConfig::disabled();
        env.seed = seed_value;
        let trace = run_simulation(&env, &manual("exploit-private")).unwrap();
        let l = Landscape::build(n, 0, seed_value).unwrap();
        let best = all_points(n).map(|p| l.base_fitness(p).unwrap()).fold(0.0, f64::max);
        let last = trace.record(env.steps, 0);
        assert_eq!(last.fitness, best);
        assert!(!trace.record(env.steps, 0).moved);
    }
}

#[test]
fn pinned_agent_scores_the_constant() {
    let mut env = EnvironmentConfig::standard(6, vec![manual("exploit-private")]);
    env.k = 1;
    env.flocking = FlockingConfig::disabled();
    let table = ContributionTable::from_entries(6, 1, vec![0.6; 24]).unwrap();
    let landscape = Landscape::from_table(table, env.flocking).unwrap();
    let mut sim = Simulation::with_landscape(&env, landscape, &manual("exploit-private")).unwrap();
    sim.run_to_end();
    let trace = sim.into_trace();
    assert!(trace.records.iter().all(|r| !r.moved));
    assert!((trace.performance(0) - 0.6).abs() < 1e-12);
}

#[test]
fn accepted_only_records_just_moves() {
    let mut env = EnvironmentConfig::standard(10, vec![manual("explore-either")]);
    env.steps = 20;
    env.visit_policy = VisitPolicy::AcceptedOnly;
    let trace = run_simulation(&env, &Policy::Table(Strategy::table_example())).unwrap();
    for r in trace.records.iter().filter(|r| r.step > 0) {
        assert_eq!(r.visits.len(), r.moved as usize);
    }
}

#[test]
fn heterogeneous_opponents_are_assigned_in_order() {
    let mut opponents: Vec<Policy> = ManualStrategy::ALL.iter().map(|m| Policy::Table(m.strategy())).collect();
    opponents.push(Policy::Rtts(RttsMode::Unlimited));
    let mut env = EnvironmentConfig::standard(10, opponents);
    env.steps = 5;
    let trace = run_simulation(&env, &Policy::Table(Strategy::uniform("u"))).unwrap();
    assert_eq!(trace.record(3, 7).evaluations, 56);
    assert!(trace.record(3, 1).state.is_some());
}

fn random_env(seed_value: u64) -> EnvironmentConfig {
    let mut rng = seed::rng(seed_value, &[1]);
    use rand::Rng as _;
    let pick = |rng: &mut seed::Rng| {
        let m = ManualStrategy::ALL[rng.random_range(0..6)];
        Policy::Table(m.strategy())
    };
    let opponents: Vec<Policy> = (0..7).map(|_| pick(&mut rng)).collect();
    let mut env = EnvironmentConfig::standard(10, opponents);
    env.steps = 20;
    env.seed = seed_value;
    env
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn update_order_never_changes_the_outcome(seed_value in any::<u64>(), order in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle()) {
        let env = random_env(seed_value);
        let policy = Policy::Table(Strategy::table_example());
        let mut a = Simulation::new(&env, &policy).unwrap();
        let mut b = Simulation::new(&env, &policy).unwrap();
        b.set_update_order(order).unwrap();
        while !a.is_finished() {
            a.step();
            b.step();
            prop_assert_eq!(a.landscape().overlay_snapshot(), b.landscape().overlay_snapshot());
            prop_assert_eq!(a.public_memory(), b.public_memory());
        }
    }

    #[test]
    fn memory_bests_never_get_worse(seed_value in any::<u64>()) {
        let env = random_env(seed_value);
        let mut sim = Simulation::new(&env, &Policy::Table(Strategy::uniform("u"))).unwrap();
        let mut public = sim.public_memory().best().unwrap().stored_fitness;
        let mut private: Vec<f64> = (0..8).map(|a| sim.private_memory(a).best().unwrap().stored_fitness).collect();
        while !sim.is_finished() {
            sim.step();
            let now = sim.public_memory().best().unwrap().stored_fitness;
            prop_assert!(now >= public);
            public = now;
            for (a, p) in private.iter_mut().enumerate() {
                let now = sim.private_memory(a).best().unwrap().stored_fitness;
                prop_assert!(now >= *p);
                *p = now;
            }
        }
    }

    #[test]
    fn recorded_visits_are_the_probes(seed_value in any::<u64>()) {
        let env = random_env(seed_value);
        let trace = run_simulation(&env, &Policy::Table(Strategy::uniform("u"))).unwrap();
        for r in trace.records.iter().filter(|r| r.step > 0) {
            prop_assert_eq!(r.visits.len(), r.evaluations as usize);
            if r.moved {
                prop_assert_eq!(*r.visits.last().unwrap(), r.position);
            }
        }
    }

    #[test]
    fn evaluation_budgets_hold(seed_value in any::<u64>()) {
        let mut env = random_env(seed_value);
        env.steps = 10;
        for (name, cap) in [("exploit-either", env.n), ("explore-either", env.max_jump_attempts)] {
            let trace = run_simulation(&env, &manual(name)).unwrap();
            prop_assert!(trace.agent_records(0).all(|r| r.evaluations as usize <= cap));
        }
    }

    #[test]
    fn unit_intensity_keeps_base_fitness(seed_value in any::<u64>()) {
        let mut env = random_env(seed_value);
        env.flocking = FlockingConfig { intensity_start: 1.0, intensity_end: 1.0, ..FlockingConfig::default() };
        let trace = run_simulation(&env, &Policy::Table(Strategy::table_example())).unwrap();
        let l = Landscape::build(env.n, env.k, env.seed).unwrap();
        for r in &trace.records {
            prop_assert_eq!(r.fitness, l.base_fitness(r.position).unwrap());
        }
    }
}

#[test]
fn statistics_replay_exactly() {
    let mut env = EnvironmentConfig::standard(10, vec![manual("exploit-public")]);
    env.steps = 30;
    env.seed = 17;
    let p = manual("explore-private");
    let a = evaluate_strategy(&p, &env, 12).unwrap();
    assert_eq!(a, evaluate_strategy(&p, &env, 12).unwrap());
    let mean = a.samples.iter().sum::<f64>() / 12.0;
    assert!((a.mean - mean).abs() < 1e-12);
    assert!((a.std_err - a.std_dev / 12f64.sqrt()).abs() < 1e-12);
}

#[test]
fn s2_private_destination_keeps_points_out_of_public_memory() {
    let s1 = S1Table::new([[0.5, 0.0, 0.5, 0.0]; 4]).unwrap();
    let s2 = S2Table::new([[0.0, 1.0]; 2]).unwrap();
    let hoard = Policy::Table(Strategy::new(s1, s2, "hoard"));
    let mut env = EnvironmentConfig::standard(10, vec![manual("exploit-private")]);
    env.steps = 25;
    let mut sim = Simulation::new(&env, &hoard).unwrap();
    sim.run_to_end();
    assert!(sim.public_memory().entries().iter().all(|e| e.inserted_step == 0 || e.owner != 0));
}
