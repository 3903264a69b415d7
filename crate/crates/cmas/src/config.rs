//! Experiment descriptions: a TOML file whose every field has a default, so
//! an empty file runs the standard setup.

use std::fmt;
use std::path::{Path, PathBuf};

use cmas_core::catalog::ManualStrategy;
use cmas_core::cppn::decode_strategy;
use cmas_core::landscape::FlockingConfig;
use cmas_core::neat::{NeatConfig, UNMAPPED_PARAMETERS};
use cmas_core::rtts::RttsMode;
use cmas_core::seed;
use cmas_core::simulation::{EnvironmentConfig, Policy, VisitPolicy};
use cmas_core::strategy::Strategy;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};
use crate::formats;

/// Seed-path tag for per-environment run batches.
pub const ENVIRONMENT_TAG: u64 = 0x454e_5649;
/// Seed-path tag for evolutionary runs.
pub const EVOLUTION_TAG: u64 = 0x4556_4f4c;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ManualComparison,
    EvolvePerEnv,
    EvolveGeneralHomogeneous,
    EvolveGeneralHeterogeneous,
    RttsComparison,
    PriorVisits,
    WaveTrace,
    Render,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::ManualComparison => "manual-comparison",
            ExperimentKind::EvolvePerEnv => "evolve-per-env",
            ExperimentKind::EvolveGeneralHomogeneous => "evolve-general-homogeneous",
            ExperimentKind::EvolveGeneralHeterogeneous => "evolve-general-heterogeneous",
            ExperimentKind::RttsComparison => "rtts-comparison",
            ExperimentKind::PriorVisits => "prior-visits",
            ExperimentKind::WaveTrace => "wave-trace",
            ExperimentKind::Render => "render",
        }
    }

    pub fn is_evolution(self) -> bool {
        matches!(
            self,
            ExperimentKind::EvolvePerEnv
                | ExperimentKind::EvolveGeneralHomogeneous
                | ExperimentKind::EvolveGeneralHeterogeneous
        )
    }

    fn default_environments(self) -> Vec<u8> {
        match self {
            ExperimentKind::EvolveGeneralHomogeneous => (1..=7).collect(),
            ExperimentKind::EvolveGeneralHeterogeneous => vec![8],
            ExperimentKind::WaveTrace | ExperimentKind::Render => vec![1],
            _ => (1..=6).collect(),
        }
    }

    fn default_strategies(self) -> Vec<String> {
        match self {
            ExperimentKind::WaveTrace | ExperimentKind::Render => vec!["exploit-private".into()],
            _ => ManualStrategy::ALL.iter().map(|m| m.name().to_string()).collect(),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Run-size presets for evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// Population 50, 50 generations, 8 runs, 8 simulations per evaluation.
    #[default]
    Scaled,
    /// Population 100, 500 generations, 64 runs, 200 simulations per evaluation.
    Full,
}

impl Profile {
    pub fn neat(self) -> NeatConfig {
        let (population_size, generations, runs_per_eval) = match self {
            Profile::Scaled => (50, 50, 8),
            Profile::Full => (100, 500, 200),
        };
        NeatConfig { population_size, generations, runs_per_eval, ..NeatConfig::default() }
    }

    pub fn evolution_runs(self) -> usize {
        match self {
            Profile::Scaled => 8,
            Profile::Full => 64,
        }
    }
}

/// An environment by standard number or by explicit opponent list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvironmentRef {
    Standard(u8),
    Custom { name: String, opponents: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlockingSection {
    pub intensity_start: f64,
    pub intensity_end: f64,
    pub decay_visits: u32,
    pub radius: u32,
}

impl Default for FlockingSection {
    fn default() -> Self {
        let f = FlockingConfig::default();
        FlockingSection {
            intensity_start: f.intensity_start,
            intensity_end: f.intensity_end,
            decay_visits: f.decay_visits,
            radius: f.radius,
        }
    }
}

impl From<&FlockingSection> for FlockingConfig {
    fn from(s: &FlockingSection) -> Self {
        FlockingConfig {
            intensity_start: s.intensity_start,
            intensity_end: s.intensity_end,
            decay_visits: s.decay_visits,
            radius: s.radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VisitPolicyName {
    #[default]
    AllEvaluations,
    AcceptedOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    /// Bits per point; 20 is the sparse setting, 10 the dense one.
    pub n: usize,
    pub k: usize,
    pub agents: usize,
    pub steps: usize,
    pub explore_range: [f64; 2],
    pub max_jump_attempts: usize,
    pub visit_policy: VisitPolicyName,
    /// Policy of RTTS opponents in environments 7 and 8.
    pub rtts_opponent: String,
    pub flocking: FlockingSection,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            n: 20,
            k: 3,
            agents: 8,
            steps: 100,
            explore_range: [0.5, 1.0],
            max_jump_attempts: 10,
            visit_policy: VisitPolicyName::AllEvaluations,
            rtts_opponent: "rtts".into(),
            flocking: FlockingSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    /// Independent evolutionary runs per group; the profile decides when unset.
    pub runs: Option<usize>,
    /// Generations between checkpoints; 0 disables checkpointing.
    pub checkpoint_interval: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarkerSource {
    /// Past positions of the followed agent plus its current one.
    #[default]
    Trace,
    /// The full depth-2 scan around the focus.
    RttsProbes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderSection {
    /// Fixed focus point as a bit string.
    pub focus: Option<String>,
    /// Landscape snapshot taken after this step.
    pub step: usize,
    pub agent: usize,
    /// Move the focus with the agent in wave-trace frames.
    pub follow_agent: bool,
    pub markers: MarkerSource,
    pub elevation_scale: f64,
    pub rear_view: bool,
}

impl Default for RenderSection {
    fn default() -> Self {
        RenderSection {
            focus: None,
            step: 0,
            agent: 0,
            follow_agent: false,
            markers: MarkerSource::Trace,
            elevation_scale: 0.25,
            rear_view: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: Option<ExperimentKind>,
    pub seed: u64,
    pub profile: Profile,
    pub environments: Vec<EnvironmentRef>,
    /// Manual names, `rtts`, `rtts-matched`, `uniform`, or paths to
    /// `.toml` strategy files and `.genome` files.
    pub strategies: Vec<String>,
    /// Simulation runs per (environment, strategy) cell.
    pub repeats: Option<usize>,
    pub output: Option<PathBuf>,
    pub simulation: SimulationSection,
    /// Overrides of NEAT parameters by field name.
    pub neat: toml::Table,
    pub evolution: EvolutionSection,
    pub render: RenderSection,
    /// Directory relative file paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            kind: None,
            seed: 1,
            profile: Profile::Scaled,
            environments: Vec::new(),
            strategies: Vec::new(),
            repeats: None,
            output: None,
            simulation: SimulationSection::default(),
            neat: toml::Table::new(),
            evolution: EvolutionSection::default(),
            render: RenderSection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

/// A ready-to-run environment with its batch seed.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedEnvironment {
    pub label: String,
    pub opponents: Vec<String>,
    /// `config.seed` is the batch seed; run `r` uses `run_seed(batch, r)`.
    pub config: EnvironmentConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPolicy {
    pub label: String,
    pub policy: Policy,
}

/// A validated experiment with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub kind: ExperimentKind,
    pub environments: Vec<NamedEnvironment>,
    pub strategies: Vec<NamedPolicy>,
    pub neat: NeatConfig,
    pub repeats: usize,
    pub evolution_runs: usize,
    pub checkpoint_interval: usize,
    pub output: PathBuf,
    /// Hex SHA-256 of everything that affects numeric results.
    pub fingerprint: String,
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| HarnessError::config(format!("{}: {e}", path.display())))?;
        let mut spec = Self::parse(&text).map_err(|e| HarnessError::config(format!("{}: {e}", path.display())))?;
        spec.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(spec)
    }

    fn neat_config(&self) -> Result<NeatConfig> {
        let base = self.profile.neat();
        let mut table = toml::Table::try_from(&base).expect("NEAT config serializes");
        for (key, value) in &self.neat {
            if UNMAPPED_PARAMETERS.contains(&key.as_str()) {
                log::warn!("NEAT parameter {key} has no counterpart here and is ignored");
                continue;
            }
            if !table.contains_key(key) {
                return Err(HarnessError::config(format!("unknown NEAT parameter {key:?}")));
            }
            table.insert(key.clone(), value.clone());
        }
        let config: NeatConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::config(format!("[neat]: {e}")))?;
        config.validate().map_err(|e| HarnessError::config(e.to_string()))?;
        Ok(config)
    }

    fn base_environment(&self) -> EnvironmentConfig {
        let s = &self.simulation;
        EnvironmentConfig {
            n: s.n,
            k: s.k,
            num_agents: s.agents,
            steps: s.steps,
            opponents: Vec::new(),
            explore_range: (s.explore_range[0], s.explore_range[1]),
            max_jump_attempts: s.max_jump_attempts,
            flocking: (&s.flocking).into(),
            visit_policy: match s.visit_policy {
                VisitPolicyName::AllEvaluations => VisitPolicy::AllEvaluations,
                VisitPolicyName::AcceptedOnly => VisitPolicy::AcceptedOnly,
            },
            seed: 0,
        }
    }

    /// Turns a strategy source into a policy.
    pub fn policy(&self, source: &str, neat: &NeatConfig) -> Result<NamedPolicy> {
        let named = |label: &str, policy| Ok(NamedPolicy { label: label.to_string(), policy });
        if let Some(m) = ManualStrategy::by_name(source) {
            return named(source, Policy::Table(m.strategy()));
        }
        match source {
            "rtts" => return named(source, Policy::Rtts(RttsMode::Unlimited)),
            "rtts-matched" => return named(source, Policy::Rtts(RttsMode::BudgetMatched)),
            "uniform" => return named(source, Policy::Table(Strategy::uniform("uniform"))),
            _ => {}
        }
        let path = self.base_dir.join(source);
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if ext != "toml" && ext != "genome" {
            return Err(HarnessError::config(format!(
                "unknown strategy {source:?}: expected a manual name, rtts, rtts-matched, uniform, or a .toml/.genome file"
            )));
        }
        if !path.is_file() {
            return Err(HarnessError::config(format!("strategy file {} does not exist", path.display())));
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(source).to_string();
        let strategy = if ext == "toml" {
            formats::read_strategy(&path)?
        } else {
            decode_strategy(&formats::read_genome(&path)?, neat.squash, stem.clone())
        };
        Ok(NamedPolicy { label: stem, policy: Policy::Table(strategy) })
    }

    fn environment(&self, index: usize, reference: &EnvironmentRef, neat: &NeatConfig) -> Result<NamedEnvironment> {
        let manual = |i: usize| ManualStrategy::ALL[i].name().to_string();
        let (label, sources) = match reference {
            EnvironmentRef::Standard(n @ 1..=6) => (format!("env{n}"), vec![manual(*n as usize - 1)]),
            EnvironmentRef::Standard(7) => ("env7".into(), vec![self.simulation.rtts_opponent.clone()]),
            EnvironmentRef::Standard(8) => {
                let mut v: Vec<String> = (0..6).map(manual).collect();
                v.push(self.simulation.rtts_opponent.clone());
                ("env8".into(), v)
            }
            EnvironmentRef::Standard(n) => {
                return Err(HarnessError::config(format!("standard environments are numbered 1 to 8, got {n}")))
            }
            EnvironmentRef::Custom { name, opponents } => (name.clone(), opponents.clone()),
        };
        let mut config = self.base_environment();
        config.opponents = sources.iter().map(|s| Ok(self.policy(s, neat)?.policy)).collect::<Result<_>>()?;
        config.seed = seed::derive(self.seed, &[ENVIRONMENT_TAG, index as u64]);
        config.validate().map_err(|e| HarnessError::config(format!("environment {label}: {e}")))?;
        Ok(NamedEnvironment { label, opponents: sources, config })
    }

    /// Validates the description and fills in every default. `kind` overrides a
    /// missing `kind` field and must agree with a present one.
    pub fn resolve(&self, kind: Option<ExperimentKind>) -> Result<Experiment> {
        let kind = match (self.kind, kind) {
            (Some(a), Some(b)) if a != b => {
                return Err(HarnessError::config(format!("spec is a {a} experiment, not {b}")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(HarnessError::config("experiment kind is not set")),
        };
        let neat = self.neat_config()?;
        let refs: Vec<EnvironmentRef> = if self.environments.is_empty() {
            kind.default_environments().into_iter().map(EnvironmentRef::Standard).collect()
        } else {
            self.environments.clone()
        };
        let environments =
            refs.iter().enumerate().map(|(i, r)| self.environment(i, r, &neat)).collect::<Result<Vec<_>>>()?;
        let mut sources = if self.strategies.is_empty() { kind.default_strategies() } else { self.strategies.clone() };
        if kind == ExperimentKind::RttsComparison {
            for (i, r) in ["rtts", "rtts-matched"].into_iter().enumerate() {
                if !sources.iter().any(|s| s == r) {
                    sources.insert(i, r.to_string());
                }
            }
        }
        let strategies = sources.iter().map(|s| self.policy(s, &neat)).collect::<Result<Vec<_>>>()?;
        let repeats = self.repeats.unwrap_or(match kind {
            ExperimentKind::PriorVisits => 20,
            _ => 200,
        });
        if repeats == 0 && !kind.is_evolution() {
            return Err(HarnessError::config("repeats must be at least 1"));
        }
        if matches!(kind, ExperimentKind::ManualComparison | ExperimentKind::RttsComparison) && repeats < 2 {
            return Err(HarnessError::config("comparisons need at least 2 repeats for significance tests"));
        }
        let evolution_runs = self.evolution.runs.unwrap_or(self.profile.evolution_runs());
        if kind.is_evolution() && evolution_runs == 0 {
            return Err(HarnessError::config("evolution.runs must be at least 1"));
        }
        if matches!(kind, ExperimentKind::WaveTrace | ExperimentKind::Render) {
            if self.render.agent >= self.simulation.agents {
                return Err(HarnessError::config(format!("render.agent {} does not exist", self.render.agent)));
            }
            if self.render.step > self.simulation.steps {
                return Err(HarnessError::config("render.step is past the end of the run"));
            }
            if let Some(f) = &self.render.focus {
                let p = formats::parse_point(f)?;
                if p.len() != self.simulation.n {
                    return Err(HarnessError::config(format!("focus {f} does not have {} bits", self.simulation.n)));
                }
            }
            if self.render.elevation_scale.is_nan() || self.render.elevation_scale < 0.0 {
                return Err(HarnessError::config("render.elevation_scale must be nonnegative"));
            }
        }
        Ok(Experiment {
            kind,
            environments,
            strategies,
            neat,
            repeats,
            evolution_runs,
            checkpoint_interval: self.evolution.checkpoint_interval.unwrap_or(10),
            output: self
                .output
                .as_ref()
                .map(|o| self.base_dir.join(o))
                .unwrap_or_else(|| PathBuf::from("results").join(kind.label())),
            fingerprint: String::new(),
            spec: self.clone(),
        }
        .with_fingerprint())
    }
}

#[derive(Serialize)]
struct FingerprintInput<'a> {
    kind: ExperimentKind,
    seed: u64,
    environments: Vec<(&'a str, &'a EnvironmentConfig)>,
    strategies: Vec<(&'a str, &'a Policy)>,
    neat: &'a NeatConfig,
    repeats: usize,
    evolution_runs: usize,
    render: &'a RenderSection,
}

impl Experiment {
    /// Hash of everything that affects numeric results, including the
    /// contents of referenced strategy files. The output location and the
    /// checkpoint cadence are excluded.
    fn with_fingerprint(mut self) -> Self {
        let input = FingerprintInput {
            kind: self.kind,
            seed: self.spec.seed,
            environments: self.environments.iter().map(|e| (e.label.as_str(), &e.config)).collect(),
            strategies: self.strategies.iter().map(|s| (s.label.as_str(), &s.policy)).collect(),
            neat: &self.neat,
            repeats: self.repeats,
            evolution_runs: self.evolution_runs,
            render: &self.spec.render,
        };
        let json = serde_json::to_string(&input).expect("experiment serializes");
        self.fingerprint = Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        self
    }
}
