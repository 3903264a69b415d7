//! Summary statistics, PCA of strategy vectors, state occupancy and
//! prior-visit accounting over run traces.

use alloc::vec::Vec;

use hashbrown::HashMap;
use nalgebra::{SMatrix, SVector, SymmetricEigen};
use rustc_hash::FxBuildHasher;

use crate::landscape::{ball_masks, Point};
use crate::simulation::RunTrace;
use crate::strategy::{private_mass, StateOccupancy};

pub const VECTOR_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("ensemble has zero variance")]
    ZeroVariance,
    #[error("no traces supplied")]
    NoTraces,
}

/// Arithmetic mean; `NaN` for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two samples.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn sample_std_dev(xs: &[f64]) -> f64 {
    libm::sqrt(sample_variance(xs))
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Welch's unequal-variance t statistic and Welch-Satterthwaite degrees of
/// freedom. The tail probability is left to the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchStatistic {
    /// Positive when the first sample has the larger mean.
    pub t: f64,
    pub df: f64,
    pub mean_difference: f64,
}

pub fn welch_statistic(a: &[f64], b: &[f64]) -> Result<WelchStatistic, AnalysisError> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(AnalysisError::TooFewSamples { needed: 2, got: s.len() });
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_variance(a) / na, sample_variance(b) / nb);
    let diff = mean(a) - mean(b);
    let se2 = va + vb;
    if se2 == 0.0 {
        let t = if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY };
        return Ok(WelchStatistic { t, df: na + nb - 2.0, mean_difference: diff });
    }
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(WelchStatistic { t: diff / libm::sqrt(se2), df, mean_difference: diff })
}

/// Strategy vectors with a label and fitness each.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StrategyEnsemble {
    pub vectors: Vec<[f64; VECTOR_LEN]>,
    pub labels: Vec<alloc::string::String>,
    pub fitness: Vec<f64>,
}

impl StrategyEnsemble {
    pub fn push(&mut self, vector: [f64; VECTOR_LEN], label: impl Into<alloc::string::String>, fitness: f64) {
        self.vectors.push(vector);
        self.labels.push(label.into());
        self.fitness.push(fitness);
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: [f64; VECTOR_LEN],
    /// Principal axes, largest variance first, unit length.
    pub components: Vec<[f64; VECTOR_LEN]>,
    /// Variance captured by each component, as fractions summing to one.
    pub explained: [f64; VECTOR_LEN],
    /// First-component coordinate of every input vector.
    pub coordinates: Vec<f64>,
}

impl Pca {
    /// Coordinates of `v` on every component.
    pub fn project_all(&self, v: &[f64; VECTOR_LEN]) -> [f64; VECTOR_LEN] {
        let mut out = [0.0; VECTOR_LEN];
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = (0..VECTOR_LEN).map(|i| (v[i] - self.mean[i]) * c[i]).sum();
        }
        out
    }
}

/// Projects strategy vectors onto their first principal component.
///
/// The axis is oriented so that private-memory probability mass correlates
/// positively with the coordinate.
pub fn pca_project(vectors: &[[f64; VECTOR_LEN]]) -> Result<Pca, AnalysisError> {
    if vectors.len() < 2 {
        return Err(AnalysisError::TooFewSamples { needed: 2, got: vectors.len() });
    }
    let n = vectors.len() as f64;
    let mut mean = [0.0; VECTOR_LEN];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x / n;
        }
    }
    let mut cov = SMatrix::<f64, VECTOR_LEN, VECTOR_LEN>::zeros();
    for v in vectors {
        let c = SVector::<f64, VECTOR_LEN>::from_fn(|i, _| v[i] - mean[i]);
        cov += c * c.transpose();
    }
    cov /= n - 1.0;
    let total = cov.trace();
    if total.is_nan() || total <= 1e-15 {
        return Err(AnalysisError::ZeroVariance);
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..VECTOR_LEN).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = Vec::with_capacity(VECTOR_LEN);
    let mut explained = [0.0; VECTOR_LEN];
    let clipped: f64 = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).sum();
    for (slot, &i) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        let mut axis = [0.0; VECTOR_LEN];
        for (a, x) in axis.iter_mut().zip(col.iter()) {
            *a = *x;
        }
        // Deterministic sign: largest-magnitude entry positive.
        let pivot = (0..VECTOR_LEN)
            .max_by(|&a, &b| libm::fabs(axis[a]).total_cmp(&libm::fabs(axis[b])).then(b.cmp(&a)))
            .unwrap_or(0);
        if axis[pivot] < 0.0 {
            axis.iter_mut().for_each(|a| *a = -*a);
        }
        components.push(axis);
        explained[slot] = eig.eigenvalues[i].max(0.0) / clipped;
    }

    let project = |v: &[f64; VECTOR_LEN], axis: &[f64; VECTOR_LEN]| -> f64 {
        (0..VECTOR_LEN).map(|i| (v[i] - mean[i]) * axis[i]).sum()
    };
    let mut coordinates: Vec<f64> = vectors.iter().map(|v| project(v, &components[0])).collect();
    let masses: Vec<f64> = vectors.iter().map(|v| private_mass(v)).collect();
    let mass_mean = self::mean(&masses);
    let covariance: f64 = coordinates.iter().zip(&masses).map(|(c, m)| c * (m - mass_mean)).sum();
    if covariance < 0.0 {
        components[0].iter_mut().for_each(|a| *a = -*a);
        coordinates.iter_mut().for_each(|c| *c = -*c);
    }
    Ok(Pca { mean, components, explained, coordinates })
}

/// State occupancy of one agent as percentages: S1 states then S2 states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancyPercentages {
    pub s1: [f64; 4],
    pub s2: [f64; 2],
    pub counts: StateOccupancy,
}

pub fn aggregate_occupancy(traces: &[RunTrace], agent: usize) -> Result<OccupancyPercentages, AnalysisError> {
    if traces.is_empty() {
        return Err(AnalysisError::NoTraces);
    }
    let mut counts = StateOccupancy::default();
    for t in traces {
        counts.merge(&t.occupancy(agent));
    }
    let (s1, s2) = counts.fractions();
    Ok(OccupancyPercentages { s1: s1.map(|f| 100.0 * f), s2: s2.map(|f| 100.0 * f), counts })
}

/// Earlier visits near the evaluated agent, per step.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorVisitReport {
    pub radius: usize,
    /// Steps sampled (every step after initialization, over all traces).
    pub samples: usize,
    pub total_self: u64,
    pub total_opponents: u64,
    pub mean_self: f64,
    pub mean_opponents: f64,
    /// Per-step means over traces, indexed by step (entry 0 unused).
    pub per_step_self: Vec<f64>,
    pub per_step_opponents: Vec<f64>,
}

impl PriorVisitReport {
    pub fn mean_total(&self) -> f64 {
        self.mean_self + self.mean_opponents
    }
}

/// For each step `t >= 1`, counts visits recorded in steps before `t` that
/// fall within `radius` of `agent`'s position at `t`.
pub fn count_prior_visits(traces: &[RunTrace], agent: usize, radius: usize) -> Result<PriorVisitReport, AnalysisError> {
    if traces.is_empty() {
        return Err(AnalysisError::NoTraces);
    }
    let steps = traces.iter().map(|t| t.steps).max().unwrap_or(0);
    let mut per_self = alloc::vec![0u64; steps + 1];
    let mut per_opp = alloc::vec![0u64; steps + 1];
    let mut per_count = alloc::vec![0u64; steps + 1];
    let (mut total_self, mut total_opp, mut samples) = (0u64, 0u64, 0usize);
    for trace in traces {
        let masks = ball_masks(trace.n, radius);
        let mut seen: HashMap<Point, (u64, u64), FxBuildHasher> = HashMap::default();
        for step in 0..=trace.steps {
            if step > 0 {
                let here = trace.record(step, agent).position;
                let (mut s, mut o) = (0u64, 0u64);
                if seen.len() < masks.len() {
                    for (p, c) in &seen {
                        if p.hamming(&here) as usize <= radius {
                            s += c.0;
                            o += c.1;
                        }
                    }
                } else {
                    for &m in &masks {
                        if let Some(c) = seen.get(&here.xor(m)) {
                            s += c.0;
                            o += c.1;
                        }
                    }
                }
                per_self[step] += s;
                per_opp[step] += o;
                per_count[step] += 1;
                total_self += s;
                total_opp += o;
                samples += 1;
            }
            for a in 0..trace.num_agents {
                for &v in &trace.record(step, a).visits {
                    let c = seen.entry(v).or_default();
                    if a == agent {
                        c.0 += 1
                    } else {
                        c.1 += 1
                    }
                }
            }
        }
    }
    let avg = |xs: &[u64]| -> Vec<f64> {
        xs.iter().zip(&per_count).map(|(&x, &c)| if c == 0 { 0.0 } else { x as f64 / c as f64 }).collect()
    };
    let denom = samples.max(1) as f64;
    Ok(PriorVisitReport {
        radius,
        samples,
        total_self,
        total_opponents: total_opp,
        mean_self: total_self as f64 / denom,
        mean_opponents: total_opp as f64 / denom,
        per_step_self: avg(&per_self),
        per_step_opponents: avg(&per_opp),
    })
}
