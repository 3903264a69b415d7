//! Experiment runners. Each is a pure function of the resolved experiment:
//! work is spread over the rayon pool but every unit draws only from its
//! own derived seed, and results are written in a fixed order.

use std::path::PathBuf;

use cmas_core::analysis::{aggregate_occupancy, count_prior_visits};
use cmas_core::cppn::{decode_strategy, Genome};
use cmas_core::landscape::Point;
use cmas_core::neat::{Evolution, GenerationStats};
use cmas_core::rtts::{scan_points, RttsAgent};
use cmas_core::seed;
use cmas_core::simulation::{run_once, run_seed, run_simulation, PerformanceStats, Policy, RunSummary, Simulation};
use cmas_core::sphereviz::{render, MarkerKind, RenderOptions, SphericalGrid};
use cmas_core::strategy::StateOccupancy;
use rayon::prelude::*;
use serde::Serialize;

use crate::checkpoint::Checkpoint;
use crate::config::{Experiment, ExperimentKind, MarkerSource, NamedEnvironment, EVOLUTION_TAG};
use crate::error::{HarnessError, Result};
use crate::evaluator::ParallelEvaluator;
use crate::formats::{self, genome_to_text, heightfield_rows, marker_rows, point_to_string, strategy_to_toml};
use crate::output::{OutputDir, SeedRecord};
use crate::stats::welch_test;
use crate::svg::{pie_svg, sphere_svg};

/// What an experiment produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub output: PathBuf,
    pub files: Vec<String>,
    pub summary: Vec<String>,
}

pub fn run_experiment(experiment: &Experiment) -> Result<ExperimentReport> {
    let mut out = OutputDir::create(&experiment.output)?;
    let (summary, seeds) = match experiment.kind {
        ExperimentKind::ManualComparison | ExperimentKind::RttsComparison => {
            let c = compare(experiment)?;
            c.write(&mut out)?;
            (c.summary.iter().map(SummaryRow::line).collect(), Vec::new())
        }
        k if k.is_evolution() => {
            let runs = evolve(experiment, &mut out)?;
            let lines = runs
                .iter()
                .map(|r| {
                    format!(
                        "{} run {}: best {:.4} (generation 0 best {:.4})",
                        r.group,
                        r.run,
                        r.best_fitness,
                        r.initial_best()
                    )
                })
                .collect();
            let seeds =
                runs.iter().map(|r| SeedRecord { label: format!("{}/run{}", r.group, r.run), seed: r.seed }).collect();
            (lines, seeds)
        }
        ExperimentKind::PriorVisits => {
            let rows = prior_visits(experiment, &mut out)?;
            (
                rows.iter()
                    .map(|r| {
                        format!(
                            "{} {}: {:.2} self + {:.2} opponents",
                            r.environment, r.strategy, r.mean_self, r.mean_opponents
                        )
                    })
                    .collect(),
                Vec::new(),
            )
        }
        ExperimentKind::WaveTrace => {
            let (frames, seed) = wave_trace(experiment, &mut out)?;
            (vec![format!("{frames} frames")], vec![SeedRecord { label: "run".into(), seed }])
        }
        _ => {
            let (markers, seed) = render_snapshot(experiment, &mut out)?;
            (vec![format!("rendered {markers} markers")], vec![SeedRecord { label: "run".into(), seed }])
        }
    };
    let output = out.root().to_path_buf();
    let files = out.finish(experiment, seeds)?;
    Ok(ExperimentReport { output, files, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub environment: String,
    pub strategy: String,
    pub run: usize,
    pub seed: u64,
    pub performance: f64,
    pub mean_evaluations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub environment: String,
    pub strategy: String,
    pub runs: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub std_err: f64,
    pub evaluations_per_step: f64,
    /// Evaluations behind each move, for RTTS policies only.
    pub evaluations_per_move: Option<f64>,
}

impl SummaryRow {
    fn line(&self) -> String {
        format!("{} {}: {:.4} ± {:.4}", self.environment, self.strategy, self.mean, self.std_err)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRow {
    pub environment: String,
    pub first: String,
    pub second: String,
    pub mean_difference: f64,
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
    pub p_first_greater: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub runs: Vec<RunRow>,
    pub summary: Vec<SummaryRow>,
    pub pairwise: Vec<PairRow>,
    /// Indexed `[environment][strategy]`.
    pub stats: Vec<Vec<PerformanceStats>>,
}

impl Comparison {
    pub fn stats_for(&self, experiment: &Experiment, environment: &str, strategy: &str) -> Option<&PerformanceStats> {
        let e = experiment.environments.iter().position(|x| x.label == environment)?;
        let s = experiment.strategies.iter().position(|x| x.label == strategy)?;
        Some(&self.stats[e][s])
    }

    fn write(&self, out: &mut OutputDir) -> Result<()> {
        out.write_csv("results.csv", &self.summary)?;
        out.write_csv("runs.csv", &self.runs)?;
        out.write_csv("pairwise.csv", &self.pairwise)?;
        Ok(())
    }
}

fn steps_per_move(policy: &Policy, n: usize) -> Option<usize> {
    match policy {
        Policy::Rtts(mode) => Some(RttsAgent::new(*mode, n).steps_per_move()),
        Policy::Table(_) => None,
    }
}

/// Evaluates every strategy as agent 0 in every environment. All strategies
/// in one environment share the same landscape and start seeds.
pub fn compare(experiment: &Experiment) -> Result<Comparison> {
    let (ne, ns, nr) = (experiment.environments.len(), experiment.strategies.len(), experiment.repeats);
    let summaries: Vec<RunSummary> = (0..ne * ns * nr)
        .into_par_iter()
        .map(|i| {
            let (e, s, r) = (i / (ns * nr), (i / nr) % ns, i % nr);
            run_once(&experiment.environments[e].config, &experiment.strategies[s].policy, r)
        })
        .collect::<Result<_, _>>()?;
    let mut runs = Vec::with_capacity(summaries.len());
    let mut summary = Vec::new();
    let mut pairwise = Vec::new();
    let mut stats = Vec::new();
    for (e, env) in experiment.environments.iter().enumerate() {
        let mut per_env = Vec::new();
        for (s, strat) in experiment.strategies.iter().enumerate() {
            let chunk = &summaries[(e * ns + s) * nr..(e * ns + s + 1) * nr];
            for (r, x) in chunk.iter().enumerate() {
                runs.push(RunRow {
                    environment: env.label.clone(),
                    strategy: strat.label.clone(),
                    run: r,
                    seed: x.seed,
                    performance: x.performance,
                    mean_evaluations: x.mean_evaluations,
                });
            }
            let st = PerformanceStats::from_runs(chunk);
            summary.push(SummaryRow {
                environment: env.label.clone(),
                strategy: strat.label.clone(),
                runs: st.runs,
                mean: st.mean,
                std_dev: st.std_dev,
                std_err: st.std_err,
                evaluations_per_step: st.mean_evaluations,
                evaluations_per_move: steps_per_move(&strat.policy, env.config.n)
                    .map(|k| st.mean_evaluations * k as f64),
            });
            per_env.push(st);
        }
        for a in 0..ns {
            for b in a + 1..ns {
                let w = welch_test(&per_env[a].samples, &per_env[b].samples)?;
                pairwise.push(PairRow {
                    environment: env.label.clone(),
                    first: experiment.strategies[a].label.clone(),
                    second: experiment.strategies[b].label.clone(),
                    mean_difference: w.mean_difference,
                    t: w.t,
                    df: w.df,
                    p_two_sided: w.p_two_sided,
                    p_first_greater: w.p_greater,
                });
            }
        }
        stats.push(per_env);
    }
    Ok(Comparison { runs, summary, pairwise, stats })
}

/// One evolutionary run of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRun {
    pub group: String,
    pub run: usize,
    pub seed: u64,
    pub history: Vec<GenerationStats>,
    pub best: Genome,
    pub best_fitness: f64,
}

impl EvolutionRun {
    pub fn initial_best(&self) -> f64 {
        self.history.first().map_or(f64::NAN, |h| h.best_fitness)
    }

    pub fn final_best(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |h| h.best_fitness)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct EvolutionRow {
    group: String,
    run: usize,
    seed: u64,
    generations: usize,
    initial_best: f64,
    final_best: f64,
    best_fitness: f64,
    hidden_nodes: usize,
    enabled_links: usize,
}

/// Environment groups evolved together: one per environment, or all at once
/// for the general modes.
fn evolution_groups(experiment: &Experiment) -> Vec<(String, Vec<&NamedEnvironment>)> {
    match experiment.kind {
        ExperimentKind::EvolvePerEnv => experiment.environments.iter().map(|e| (e.label.clone(), vec![e])).collect(),
        ExperimentKind::EvolveGeneralHomogeneous => {
            vec![("homogeneous".into(), experiment.environments.iter().collect())]
        }
        _ => vec![("heterogeneous".into(), experiment.environments.iter().collect())],
    }
}

pub fn evolve(experiment: &Experiment, out: &mut OutputDir) -> Result<Vec<EvolutionRun>> {
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for (g, (group, envs)) in evolution_groups(experiment).into_iter().enumerate() {
        let evaluator = ParallelEvaluator {
            environments: envs.iter().map(|e| e.config.clone()).collect(),
            runs_per_eval: experiment.neat.runs_per_eval,
            squash: experiment.neat.squash,
        };
        let mut group_best: Option<(Genome, f64)> = None;
        for run in 0..experiment.evolution_runs {
            let seed = seed::derive(experiment.spec.seed, &[EVOLUTION_TAG, g as u64, run as u64]);
            let ckpt = out.path(&format!("checkpoints/{group}_run{run}.json"));
            let mut evo = if ckpt.is_file() {
                log::info!("resuming {group} run {run} from {}", ckpt.display());
                Checkpoint::load(&ckpt, &experiment.fingerprint, &group, run)?
            } else {
                Evolution::new(experiment.neat.clone(), seed)?
            };
            while !evo.is_finished() {
                let stats = evo.step(&evaluator)?;
                log::debug!("{group} run {run} generation {}: best {:.4}", stats.generation, stats.best_fitness);
                let interval = experiment.checkpoint_interval;
                if interval > 0 && (evo.generation % interval == 0 || evo.is_finished()) {
                    Checkpoint::new(&experiment.fingerprint, &group, run, &evo).save(&ckpt)?;
                }
            }
            let (best, best_fitness) =
                evo.best.clone().ok_or_else(|| HarnessError::config("no generation was evaluated"))?;
            let name = format!("{group}_run{run}");
            let strategy = decode_strategy(&best, experiment.neat.squash, name.clone());
            out.write_csv(&format!("history/{name}.csv"), &evo.history)?;
            out.write_text(&format!("genomes/{name}.genome"), &genome_to_text(&best))?;
            out.write_text(&format!("strategies/{name}.toml"), &strategy_to_toml(&strategy))?;
            out.write_text(&format!("strategies/{name}.svg"), &pie_svg(&strategy, None))?;
            let r = EvolutionRun { group: group.clone(), run, seed, history: evo.history.clone(), best, best_fitness };
            rows.push(EvolutionRow {
                group: group.clone(),
                run,
                seed,
                generations: r.history.len(),
                initial_best: r.initial_best(),
                final_best: r.final_best(),
                best_fitness,
                hidden_nodes: r.best.hidden_count(),
                enabled_links: r.best.enabled_link_count(),
            });
            if group_best.as_ref().is_none_or(|(_, f)| best_fitness > *f) {
                group_best = Some((r.best.clone(), best_fitness));
            }
            results.push(r);
        }
        if let Some((genome, _)) = group_best {
            let strategy = decode_strategy(&genome, experiment.neat.squash, format!("{group}_best"));
            out.write_text(&format!("{group}_best.genome"), &genome_to_text(&genome))?;
            out.write_text(&format!("{group}_best.toml"), &strategy_to_toml(&strategy))?;
        }
    }
    out.write_csv("summary.csv", &rows)?;
    Ok(results)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorVisitRow {
    pub environment: String,
    pub strategy: String,
    pub radius: usize,
    pub samples: usize,
    pub total_self: u64,
    pub total_opponents: u64,
    pub mean_self: f64,
    pub mean_opponents: f64,
    pub mean_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct PerStepRow {
    environment: String,
    strategy: String,
    step: usize,
    self_visits: f64,
    opponent_visits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct OccupancyRow {
    environment: String,
    strategy: String,
    low_low: f64,
    low_high: f64,
    high_low: f64,
    high_high: f64,
    s2_low: f64,
    s2_high: f64,
}

/// Prior visits within the flocking radius and state occupancy of the
/// evaluated agent, per environment and strategy.
pub fn prior_visits(experiment: &Experiment, out: &mut OutputDir) -> Result<Vec<PriorVisitRow>> {
    let mut rows = Vec::new();
    let mut per_step = Vec::new();
    let mut occupancy = Vec::new();
    for env in &experiment.environments {
        let radius = env.config.flocking.radius as usize;
        for strat in &experiment.strategies {
            let traces = (0..experiment.repeats)
                .into_par_iter()
                .map(|r| run_simulation(&env.config.with_seed(run_seed(env.config.seed, r)), &strat.policy))
                .collect::<Result<Vec<_>, _>>()?;
            let report = count_prior_visits(&traces, 0, radius)?;
            for step in 1..report.per_step_self.len() {
                per_step.push(PerStepRow {
                    environment: env.label.clone(),
                    strategy: strat.label.clone(),
                    step,
                    self_visits: report.per_step_self[step],
                    opponent_visits: report.per_step_opponents[step],
                });
            }
            rows.push(PriorVisitRow {
                environment: env.label.clone(),
                strategy: strat.label.clone(),
                radius,
                samples: report.samples,
                total_self: report.total_self,
                total_opponents: report.total_opponents,
                mean_self: report.mean_self,
                mean_opponents: report.mean_opponents,
                mean_total: report.mean_total(),
            });
            if let Some(s) = strat.policy.strategy() {
                let occ = aggregate_occupancy(&traces, 0)?;
                occupancy.push(OccupancyRow {
                    environment: env.label.clone(),
                    strategy: strat.label.clone(),
                    low_low: occ.s1[0],
                    low_high: occ.s1[1],
                    high_low: occ.s1[2],
                    high_high: occ.s1[3],
                    s2_low: occ.s2[0],
                    s2_high: occ.s2[1],
                });
                out.write_text(&format!("pies/{}_{}.svg", env.label, strat.label), &pie_svg(s, Some(&occ.counts)))?;
            }
        }
    }
    out.write_csv("prior_visits.csv", &rows)?;
    out.write_csv("prior_visits_per_step.csv", &per_step)?;
    out.write_csv("occupancy.csv", &occupancy)?;
    Ok(rows)
}

fn single_run(experiment: &Experiment) -> Result<(Simulation, u64)> {
    let env = &experiment.environments[0];
    let seed = run_seed(env.config.seed, 0);
    let sim = Simulation::new(&env.config.with_seed(seed), &experiment.strategies[0].policy)?;
    Ok((sim, seed))
}

fn fixed_focus(experiment: &Experiment) -> Result<Option<Point>> {
    experiment.spec.render.focus.as_deref().map(formats::parse_point).transpose()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct FrameRow {
    frame: String,
    step: usize,
    focus: String,
    position: String,
    fitness: f64,
    markers: usize,
}

/// One sphere frame per step with the followed agent's past positions as
/// dots and its current position highlighted. Returns the frame count and
/// the run seed.
pub fn wave_trace(experiment: &Experiment, out: &mut OutputDir) -> Result<(usize, u64)> {
    let opts = &experiment.spec.render;
    let agent = opts.agent;
    let (mut sim, seed) = single_run(experiment)?;
    let fixed = fixed_focus(experiment)?;
    let start = sim.position(agent);
    let n = experiment.environments[0].config.n;
    let mut rows = Vec::new();
    let mut frames = 0;
    while !sim.is_finished() {
        sim.step();
        let step = sim.current_step();
        let path: Vec<Point> = sim.trace().positions(agent);
        let current = sim.position(agent);
        let focus = match fixed {
            Some(f) => f,
            None if opts.follow_agent => current,
            None => start,
        };
        let grid = SphericalGrid::build(n, focus).map_err(|e| HarnessError::config(e.to_string()))?;
        let mut markers: Vec<(Point, MarkerKind)> =
            path[..path.len() - 1].iter().map(|&p| (p, MarkerKind::Dot)).collect();
        markers.push((current, MarkerKind::Current));
        let scene = render(sim.landscape(), &grid, &markers, RenderOptions { elevation_scale: opts.elevation_scale })
            .map_err(cmas_core::simulation::SimError::from)?;
        let name = format!("frames/frame_{step:04}");
        out.write_text(&format!("{name}.svg"), &sphere_svg(&scene, opts.elevation_scale, opts.rear_view))?;
        out.write_csv(&format!("{name}.csv"), &heightfield_rows(&scene))?;
        rows.push(FrameRow {
            frame: format!("{name}.svg"),
            step,
            focus: point_to_string(focus),
            position: point_to_string(current),
            fitness: sim.trace().record(step, agent).fitness,
            markers: markers.len(),
        });
        frames += 1;
    }
    out.write_csv("frames.csv", &rows)?;
    out.write_csv("trace.csv", &formats::trace_rows(sim.trace()))?;
    Ok((frames, seed))
}

/// A single landscape snapshot with either the agent's trail or the RTTS
/// probe set around the focus.
pub fn render_snapshot(experiment: &Experiment, out: &mut OutputDir) -> Result<(usize, u64)> {
    let opts = &experiment.spec.render;
    let (mut sim, seed) = single_run(experiment)?;
    while sim.current_step() < opts.step {
        sim.step();
    }
    let current = sim.position(opts.agent);
    let focus = fixed_focus(experiment)?.unwrap_or(current);
    let grid = SphericalGrid::build(focus.len(), focus).map_err(|e| HarnessError::config(e.to_string()))?;
    let markers: Vec<(Point, MarkerKind)> = match opts.markers {
        MarkerSource::Trace => {
            let path = sim.trace().positions(opts.agent);
            let mut m: Vec<_> = path[..path.len() - 1].iter().map(|&p| (p, MarkerKind::Dot)).collect();
            m.push((current, MarkerKind::Current));
            m
        }
        MarkerSource::RttsProbes => scan_points(focus).into_iter().map(|p| (p, MarkerKind::Triangle)).collect(),
    };
    let scene = render(sim.landscape(), &grid, &markers, RenderOptions { elevation_scale: opts.elevation_scale })
        .map_err(cmas_core::simulation::SimError::from)?;
    out.write_text("render.svg", &sphere_svg(&scene, opts.elevation_scale, opts.rear_view))?;
    out.write_csv("heightfield.csv", &heightfield_rows(&scene))?;
    out.write_csv("markers.csv", &marker_rows(&scene))?;
    Ok((scene.markers.len(), seed))
}

/// Strategy table, pie drawing and pie data for a genome file.
pub fn decode_genome_files(
    genome: &Genome,
    squash: cmas_core::cppn::Squash,
    label: &str,
    out: &mut OutputDir,
) -> Result<()> {
    let strategy = decode_strategy(genome, squash, label);
    out.write_text(&format!("{label}.toml"), &strategy_to_toml(&strategy))?;
    out.write_text(&format!("{label}.svg"), &pie_svg(&strategy, None))?;
    #[derive(Serialize)]
    struct PieRow {
        table: &'static str,
        state: &'static str,
        column: usize,
        probability: f64,
    }
    let rows: Vec<PieRow> = cmas_core::strategy::pie_chart(&strategy, None::<&StateOccupancy>)
        .iter()
        .flat_map(|c| {
            c.probabilities
                .iter()
                .enumerate()
                .map(|(column, &probability)| PieRow { table: c.table, state: c.state, column, probability })
                .collect::<Vec<_>>()
        })
        .collect();
    out.write_csv(&format!("{label}_pie.csv"), &rows)?;
    Ok(())
}
