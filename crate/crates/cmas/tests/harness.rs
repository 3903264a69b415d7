use std::fs;
use std::path::Path;
use std::process::Command;

use cmas::checkpoint::Checkpoint;
use cmas::config::{ExperimentKind, ExperimentSpec};
use cmas::evaluator::ParallelEvaluator;
use cmas::experiments::{compare, evolve, run_experiment};
use cmas::formats::{genome_from_text, genome_to_text, read_genome, strategy_from_toml};
use cmas::output::OutputDir;
use cmas_core::neat::{genome_fitness, Evolution, FitnessEvaluator};
use cmas_core::seed;
use proptest::prelude::*;

const SMALL: &str = r#"
seed = 11
repeats = 3
[simulation]
n = 10
steps = 12
[neat]
population_size = 10
generations = 3
runs_per_eval = 2
[evolution]
runs = 2
checkpoint_interval = 1
[render]
step = 4
"#;

fn resolve(toml: &str, kind: ExperimentKind) -> cmas::Experiment {
    ExperimentSpec::parse(toml).unwrap().resolve(Some(kind)).unwrap()
}

fn into(mut e: cmas::Experiment, dir: &Path) -> cmas::Experiment {
    e.output = dir.to_path_buf();
    e
}

fn cli(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cmas")).args(args).current_dir(cwd).env("RUST_LOG", "warn").output().unwrap()
}

#[test]
fn cli_runs_are_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    for out in ["a", "b"] {
        let o = cli(&["compare-manual", "--config", "small.toml", "--out", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let o = cli(&["compare-manual", "--config", "small.toml", "--seed", "12", "--out", "c"], dir.path());
    assert!(o.status.success());
    let read = |d: &str, f: &str| fs::read(dir.path().join(d).join(f)).unwrap();
    for f in ["results.csv", "runs.csv", "pairwise.csv"] {
        assert_eq!(read("a", f), read("b", f), "{f}");
    }
    assert_ne!(read("a", "runs.csv"), read("c", "runs.csv"));
    let manifest: serde_json::Value = serde_json::from_slice(&read("a", "manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["environments"].as_array().unwrap().len(), 6);
}

#[test]
fn cli_exit_codes_separate_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "strategies = [\"no-such-strategy\"]\n").unwrap();
    assert_eq!(cli(&["compare-manual", "--config", "bad.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(cli(&["render", "--config", "missing.toml"], dir.path()).status.code(), Some(2));
    fs::write(dir.path().join("typo.toml"), "sed = 3\n").unwrap();
    assert_eq!(cli(&["compare-manual", "--config", "typo.toml"], dir.path()).status.code(), Some(2));
    fs::write(dir.path().join("kind.toml"), "kind = \"render\"\n").unwrap();
    assert_eq!(cli(&["prior-visits", "--config", "kind.toml"], dir.path()).status.code(), Some(2));
}

#[test]
fn decode_genome_writes_a_valid_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let g = cmas_core::cppn::Genome::minimal([0.5, -1.0, 0.2, 0.0, 1.5, 0.3, -0.7, 0.9, 0.1, -0.2]);
    fs::write(dir.path().join("g.genome"), genome_to_text(&g)).unwrap();
    let o = cli(&["decode-genome", "g.genome", "--out", "dec"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = strategy_from_toml(&fs::read_to_string(dir.path().join("dec/g.toml")).unwrap()).unwrap();
    assert_eq!(s, cmas_core::cppn::decode_strategy(&g, Default::default(), "g"));
    let pie = fs::read_to_string(dir.path().join("dec/g_pie.csv")).unwrap();
    assert_eq!(pie.lines().count(), 1 + 4 * 4 + 2 * 2);
    assert!(fs::read_to_string(dir.path().join("dec/g.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn heterogeneous_environment_mixes_seven_opponents() {
    let e = resolve(SMALL, ExperimentKind::EvolveGeneralHeterogeneous);
    assert_eq!(e.environments.len(), 1);
    let env = &e.environments[0];
    assert_eq!(env.label, "env8");
    assert_eq!(env.config.opponents.len(), 7);
    assert_eq!(env.opponents.last().map(String::as_str), Some("rtts"));
    let homogeneous = resolve(SMALL, ExperimentKind::EvolveGeneralHomogeneous);
    assert_eq!(homogeneous.environments.len(), 7);
    assert!(homogeneous.environments.iter().all(|e| e.config.opponents.len() == 1));
}

#[test]
fn zero_generations_evaluates_only_the_initial_population() {
    let toml = SMALL.replace("generations = 3", "generations = 0");
    let dir = tempfile::tempdir().unwrap();
    let e = into(resolve(&toml, ExperimentKind::EvolveGeneralHeterogeneous), dir.path());
    let mut out = OutputDir::create(dir.path()).unwrap();
    let runs = evolve(&e, &mut out).unwrap();
    assert_eq!(runs.len(), 2);
    for r in &runs {
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.best_fitness, r.initial_best());
        let saved = read_genome(&dir.path().join(format!("genomes/heterogeneous_run{}.genome", r.run))).unwrap();
        assert_eq!(saved, r.best);
    }
}

#[test]
fn wave_trace_writes_one_frame_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let e = into(resolve(SMALL, ExperimentKind::WaveTrace), dir.path());
    let report = run_experiment(&e).unwrap();
    let svgs = fs::read_dir(dir.path().join("frames"))
        .unwrap()
        .filter(|f| f.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
        .count();
    assert_eq!(svgs, 12);
    assert_eq!(report.summary, ["12 frames"]);
    let frames = fs::read_to_string(dir.path().join("frames.csv")).unwrap();
    assert_eq!(frames.lines().count(), 13);
    // One row per agent for every step, including step 0.
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 8 * 13);
}

#[test]
fn render_places_rtts_probes() {
    let toml = SMALL.replace("step = 4", "step = 4\nmarkers = \"rtts-probes\"\nfocus = \"1111100000\"");
    let dir = tempfile::tempdir().unwrap();
    let e = into(resolve(&toml, ExperimentKind::Render), dir.path());
    run_experiment(&e).unwrap();
    let markers = fs::read_to_string(dir.path().join("markers.csv")).unwrap();
    assert_eq!(markers.lines().count(), 1 + 56);
    let heights = fs::read_to_string(dir.path().join("heightfield.csv")).unwrap();
    assert_eq!(heights.lines().count(), 1 + 10 * 9 + 2);
}

#[test]
fn prior_visits_totals_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let toml = SMALL
        .replace("repeats = 3", "repeats = 3\nenvironments = [1, 2]\nstrategies = [\"exploit-private\", \"rtts\"]");
    let e = into(resolve(&toml, ExperimentKind::PriorVisits), dir.path());
    run_experiment(&e).unwrap();
    let mut rows = csv::Reader::from_path(dir.path().join("prior_visits.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let total: f64 = r[8].parse().unwrap();
        let parts: f64 = r[6].parse::<f64>().unwrap() + r[7].parse::<f64>().unwrap();
        assert!((total - parts).abs() < 1e-9);
    }
    // Occupancy only exists for table strategies.
    let occ = fs::read_to_string(dir.path().join("occupancy.csv")).unwrap();
    assert_eq!(occ.lines().count(), 3);
}

#[test]
fn resuming_from_a_checkpoint_matches_an_uninterrupted_run() {
    let e = resolve(&SMALL.replace("runs = 2", "runs = 1"), ExperimentKind::EvolveGeneralHeterogeneous);
    let fresh_dir = tempfile::tempdir().unwrap();
    let fresh = evolve(&into(e.clone(), fresh_dir.path()), &mut OutputDir::create(fresh_dir.path()).unwrap()).unwrap();

    let resumed_dir = tempfile::tempdir().unwrap();
    let evaluator = ParallelEvaluator {
        environments: vec![e.environments[0].config.clone()],
        runs_per_eval: e.neat.runs_per_eval,
        squash: e.neat.squash,
    };
    let mut partial =
        Evolution::new(e.neat.clone(), seed::derive(e.spec.seed, &[cmas::config::EVOLUTION_TAG, 0, 0])).unwrap();
    partial.step(&evaluator).unwrap();
    partial.step(&evaluator).unwrap();
    let ckpt = resumed_dir.path().join("checkpoints/heterogeneous_run0.json");
    Checkpoint::new(&e.fingerprint, "heterogeneous", 0, &partial).save(&ckpt).unwrap();
    let resumed =
        evolve(&into(e.clone(), resumed_dir.path()), &mut OutputDir::create(resumed_dir.path()).unwrap()).unwrap();
    assert_eq!(resumed, fresh);

    // A checkpoint from a different experiment is refused.
    let other = resolve(&SMALL.replace("seed = 11", "seed = 12"), ExperimentKind::EvolveGeneralHeterogeneous);
    let err =
        evolve(&into(other, resumed_dir.path()), &mut OutputDir::create(resumed_dir.path()).unwrap()).unwrap_err();
    assert!(err.is_config(), "{err}");
}

#[test]
fn comparisons_do_not_depend_on_thread_count() {
    let e = resolve(SMALL, ExperimentKind::RttsComparison);
    let many = compare(&e).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| compare(&e).unwrap());
    assert_eq!(many, one);
    assert_eq!(many.summary.len(), 6 * 8);
    assert_eq!(many.pairwise.len(), 6 * 28);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn parallel_evaluation_matches_sequential(batch in any::<u64>(), steps in 0usize..6) {
        let e = resolve(SMALL, ExperimentKind::EvolveGeneralHomogeneous);
        let envs: Vec<_> = e.environments.iter().take(3).map(|n| n.config.clone()).collect();
        let evaluator = ParallelEvaluator { environments: envs.clone(), runs_per_eval: 2, squash: e.neat.squash };
        let mut evo = Evolution::new(e.neat.clone(), batch).unwrap();
        for _ in 0..steps.min(2) {
            evo.step(&evaluator).unwrap();
        }
        let genomes = evo.population.clone();
        let parallel = evaluator.evaluate(&genomes, batch).unwrap();
        let sequential: Vec<f64> = genomes.iter().map(|g| genome_fitness(g, &envs, 2, e.neat.squash, batch).unwrap()).collect();
        prop_assert_eq!(parallel, sequential);
        for g in &genomes {
            prop_assert_eq!(&genome_from_text(&genome_to_text(g)).unwrap(), g);
        }
    }
}
