//! Real-time tree search with a fixed two-ply lookahead.
//!
//! Each neighbor `s'` of the current point is scored as
//! `f(s') + max f(s'')` over the neighbors `s''` of `s'`; the agent commits to
//! the best-scoring neighbor (lowest flipped dimension on ties). A full scan
//! reads every point of the radius-2 Hamming ball exactly once. The
//! budget-matched variant spreads one scan over several time steps.

use alloc::vec::Vec;

use crate::landscape::{ball_size, Landscape, Point};

/// Average evaluations per step of the memory-based strategies.
pub const MATCHED_EVALUATIONS_PER_STEP: usize = 8;

/// Points read by one full scan: `1 + n(n+1)/2`.
pub fn scan_size(n: usize) -> usize {
    ball_size(n, 2)
}

/// Steps a budget-matched agent spends per move: the scan size divided by
/// the per-step budget, rounded to nearest (26 for n = 20, 7 for n = 10).
pub fn steps_per_move(n: usize, evaluations_per_step: usize) -> usize {
    let total = scan_size(n);
    let per = evaluations_per_step.max(1);
    ((total + per / 2) / per).max(1)
}

/// Read order of a scan: the current point, its neighbors by dimension, then
/// distance-2 points by dimension pair `(i, j)`, `i < j`.
pub fn scan_points(current: Point) -> Vec<Point> {
    let n = current.len();
    let mut out = Vec::with_capacity(scan_size(n));
    out.push(current);
    out.extend((0..n).map(|i| current.flip(i)));
    for i in 0..n {
        for j in i + 1..n {
            out.push(current.flip(i).flip(j));
        }
    }
    out
}

#[inline]
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    1 + n + i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Scores of every neighbor from fitness values laid out as [`scan_points`].
pub fn neighbor_scores(n: usize, values: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let lookahead = (0..n)
                .map(|d| if d == i { values[0] } else { values[pair_index(n, i, d)] })
                .fold(f64::NEG_INFINITY, f64::max);
            values[1 + i] + lookahead
        })
        .collect()
}

fn best_dimension(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct RttsMove {
    pub next: Point,
    pub dimension: usize,
    pub scores: Vec<f64>,
    pub evaluated: Vec<Point>,
}

/// One complete scan against the landscape as it is now.
pub fn rtts_step(landscape: &Landscape, current: Point) -> RttsMove {
    let evaluated = scan_points(current);
    let values: Vec<f64> = evaluated.iter().map(|&p| landscape.fitness(p)).collect();
    let scores = neighbor_scores(current.len(), &values);
    let dimension = best_dimension(&scores);
    RttsMove { next: current.flip(dimension), dimension, scores, evaluated }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RttsMode {
    /// One full scan and one move every time step.
    Unlimited,
    /// A scan spread over [`steps_per_move`] steps.
    BudgetMatched,
}

#[derive(Debug, Clone)]
struct Scan {
    points: Vec<Point>,
    values: Vec<f64>,
    step: usize,
}

/// What an RTTS agent did during one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct RttsTick {
    pub reads: Vec<Point>,
    pub next: Option<Point>,
}

/// Scan progress of an RTTS participant. Holds no memory tables.
#[derive(Debug, Clone)]
pub struct RttsAgent {
    mode: RttsMode,
    steps_per_move: usize,
    scan: Option<Scan>,
}

impl RttsAgent {
    pub fn new(mode: RttsMode, n: usize) -> Self {
        let steps_per_move = match mode {
            RttsMode::Unlimited => 1,
            RttsMode::BudgetMatched => steps_per_move(n, MATCHED_EVALUATIONS_PER_STEP),
        };
        RttsAgent { mode, steps_per_move, scan: None }
    }

    pub fn mode(&self) -> RttsMode {
        self.mode
    }

    pub fn steps_per_move(&self) -> usize {
        self.steps_per_move
    }

    /// Advances the scan by one time step's share of reads; returns the move
    /// when the scan completes.
    pub fn tick(&mut self, landscape: &Landscape, position: Point) -> RttsTick {
        let scan = self.scan.get_or_insert_with(|| {
            let points = scan_points(position);
            Scan { values: Vec::with_capacity(points.len()), points, step: 0 }
        });
        let total = scan.points.len();
        let from = scan.step * total / self.steps_per_move;
        let to = (scan.step + 1) * total / self.steps_per_move;
        let reads = scan.points[from..to].to_vec();
        scan.values.extend(reads.iter().map(|&p| landscape.fitness(p)));
        scan.step += 1;
        if scan.step < self.steps_per_move {
            return RttsTick { reads, next: None };
        }
        let origin = scan.points[0];
        let scores = neighbor_scores(origin.len(), &scan.values);
        let next = origin.flip(best_dimension(&scores));
        self.scan = None;
        RttsTick { reads, next: Some(next) }
    }
}
