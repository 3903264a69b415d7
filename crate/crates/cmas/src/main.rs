use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cmas::config::{ExperimentKind, ExperimentSpec, Profile};
use cmas::experiments::{decode_genome_files, run_experiment};
use cmas::formats::read_genome;
use cmas::output::OutputDir;
use cmas::{HarnessError, Result};
use cmas_core::cppn::Squash;

#[derive(Parser)]
#[command(name = "cmas", version, about = "Competitive multi-agent search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment description (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Evolution size preset, overriding the config.
    #[arg(long, value_enum)]
    profile: Option<Profile>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvolveMode {
    PerEnv,
    Homogeneous,
    Heterogeneous,
}

#[derive(Clone, Copy, ValueEnum)]
enum SquashArg {
    Logistic,
    Gaussian,
}

#[derive(Subcommand)]
enum Command {
    /// Compare strategies across environments.
    CompareManual(Common),
    /// Evolve strategies with NEAT.
    Evolve {
        #[arg(long, value_enum, default_value = "per-env")]
        mode: EvolveMode,
        #[command(flatten)]
        common: Common,
    },
    /// Compare RTTS with the manual strategies.
    CompareRtts(Common),
    /// Count revisits near each agent's own path.
    PriorVisits(Common),
    /// Render one sphere frame per step of a single run.
    WaveTrace(Common),
    /// Render a single landscape snapshot.
    Render(Common),
    /// Decode a genome file into a strategy table and pie chart.
    DecodeGenome {
        genome: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Label for the decoded strategy; defaults to the file stem.
        #[arg(long)]
        label: Option<String>,
        /// Output squashing used when the genome was evolved.
        #[arg(long, value_enum, default_value = "logistic")]
        squash: SquashArg,
    },
}

fn run_kind(kind: ExperimentKind, common: Common) -> Result<()> {
    let mut spec = match &common.config {
        Some(path) => ExperimentSpec::from_file(path)?,
        None => ExperimentSpec::default(),
    };
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    if let Some(profile) = common.profile {
        spec.profile = profile;
    }
    let mut experiment = spec.resolve(Some(kind))?;
    if let Some(out) = common.out {
        experiment.output = out;
    }
    log::info!("{} experiment, fingerprint {}", experiment.kind, experiment.fingerprint);
    let report = run_experiment(&experiment)?;
    for line in &report.summary {
        println!("{line}");
    }
    println!("wrote {} files to {}", report.files.len(), report.output.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::CompareManual(c) => run_kind(ExperimentKind::ManualComparison, c),
        Command::Evolve { mode, common } => run_kind(
            match mode {
                EvolveMode::PerEnv => ExperimentKind::EvolvePerEnv,
                EvolveMode::Homogeneous => ExperimentKind::EvolveGeneralHomogeneous,
                EvolveMode::Heterogeneous => ExperimentKind::EvolveGeneralHeterogeneous,
            },
            common,
        ),
        Command::CompareRtts(c) => run_kind(ExperimentKind::RttsComparison, c),
        Command::PriorVisits(c) => run_kind(ExperimentKind::PriorVisits, c),
        Command::WaveTrace(c) => run_kind(ExperimentKind::WaveTrace, c),
        Command::Render(c) => run_kind(ExperimentKind::Render, c),
        Command::DecodeGenome { genome, out, label, squash } => {
            let g = read_genome(&genome)?;
            let label = label.unwrap_or_else(|| {
                genome.file_stem().map_or_else(|| "genome".into(), |s| s.to_string_lossy().into_owned())
            });
            let squash = match squash {
                SquashArg::Logistic => Squash::Logistic,
                SquashArg::Gaussian => Squash::Gaussian,
            };
            let mut dir = OutputDir::create(&out)?;
            decode_genome_files(&g, squash, &label, &mut dir)?;
            println!("wrote {label}.toml, {label}.svg and {label}_pie.csv to {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if HarnessError::is_config(&e) { 2 } else { 1 })
        }
    }
}
