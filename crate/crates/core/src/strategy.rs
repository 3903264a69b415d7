//! Probability-table strategies.
//!
//! `S1` maps the discretized fitness of the best public and private memory
//! points to a distribution over (search method, source memory); `S2` maps the
//! discretized fitness of a newly found point to a distribution over the
//! destination memory.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng as _;

/// Row sums below this are treated as "all very small" and made uniform.
pub const SMALL_ROW_EPSILON: f64 = 1e-6;

/// Tolerance on row sums when validating tables.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StrategyError {
    #[error("fitness {0} outside [0, 1]")]
    FitnessRange(f64),
    #[error("{table} row {row} entry {value} outside [0, 1]")]
    Entry { table: &'static str, row: usize, value: f64 },
    #[error("{table} row {row} sums to {sum}")]
    RowSum { table: &'static str, row: usize, sum: f64 },
    #[error("strategy vectors have 20 entries, got {0}")]
    VectorLength(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FitnessLevel {
    Low,
    High,
}

impl FitnessLevel {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            FitnessLevel::Low => "low",
            FitnessLevel::High => "high",
        }
    }
}

/// `Low` below 0.5, `High` from 0.5 up.
pub fn discretize(fitness: f64) -> Result<FitnessLevel, StrategyError> {
    if !(0.0..=1.0).contains(&fitness) {
        return Err(StrategyError::FitnessRange(fitness));
    }
    Ok(level_of(fitness))
}

#[inline]
pub(crate) fn level_of(fitness: f64) -> FitnessLevel {
    if fitness < 0.5 {
        FitnessLevel::Low
    } else {
        FitnessLevel::High
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SearchMethod {
    Exploit,
    Explore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MemorySource {
    Public,
    Private,
}

impl MemorySource {
    pub fn label(self) -> &'static str {
        match self {
            MemorySource::Public => "public",
            MemorySource::Private => "private",
        }
    }
}

/// An `S1` action: a search method started from a memory's best point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct S1Action {
    pub method: SearchMethod,
    pub source: MemorySource,
}

impl S1Action {
    pub const ALL: [S1Action; 4] = [
        S1Action { method: SearchMethod::Exploit, source: MemorySource::Public },
        S1Action { method: SearchMethod::Exploit, source: MemorySource::Private },
        S1Action { method: SearchMethod::Explore, source: MemorySource::Public },
        S1Action { method: SearchMethod::Explore, source: MemorySource::Private },
    ];

    /// Column index: method-major, public before private.
    pub fn index(self) -> usize {
        (self.method as usize) * 2 + self.source as usize
    }

    pub fn code(self) -> &'static str {
        match (self.method, self.source) {
            (SearchMethod::Exploit, MemorySource::Public) => "exploit-public",
            (SearchMethod::Exploit, MemorySource::Private) => "exploit-private",
            (SearchMethod::Explore, MemorySource::Public) => "explore-public",
            (SearchMethod::Explore, MemorySource::Private) => "explore-private",
        }
    }
}

/// Row index of an `S1` state: public level major.
pub fn s1_state_index(public: FitnessLevel, private: FitnessLevel) -> usize {
    public.index() * 2 + private.index()
}

pub const S1_ROW_LABELS: [&str; 4] = ["low_low", "low_high", "high_low", "high_high"];
pub const S2_ROW_LABELS: [&str; 2] = ["low", "high"];

/// Normalizes a nonnegative row to sum to one.
///
/// Rows whose sum is below `epsilon` become uniform, as do rows whose
/// entries are all equal (so that equal raw values give exactly `1/W`).
pub fn normalize_row<const W: usize>(row: [f64; W], epsilon: f64) -> [f64; W] {
    let sum: f64 = row.iter().sum();
    let uniform = [1.0 / W as f64; W];
    if sum.is_nan() || sum < epsilon || row.iter().all(|&v| v == row[0]) {
        return uniform;
    }
    row.map(|v| v / sum)
}

pub fn normalize_rows<const W: usize>(rows: &[[f64; W]], epsilon: f64) -> Vec<[f64; W]> {
    rows.iter().map(|&r| normalize_row(r, epsilon)).collect()
}

fn validate_rows<const W: usize>(table: &'static str, rows: &[[f64; W]]) -> Result<(), StrategyError> {
    for (row, values) in rows.iter().enumerate() {
        if let Some(&value) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(StrategyError::Entry { table, row, value });
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(StrategyError::RowSum { table, row, sum });
        }
    }
    Ok(())
}

fn sample_row<const W: usize>(row: &[f64; W], rng: &mut crate::seed::Rng) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut last_nonzero = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > 0.0 {
            cumulative += p;
            last_nonzero = i;
            if u < cumulative {
                return i;
            }
        }
    }
    last_nonzero
}

/// 4×4 table: rows by `(public level, private level)`, columns by
/// [`S1Action::index`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct S1Table {
    probs: [[f64; 4]; 4],
}

impl S1Table {
    pub fn new(probs: [[f64; 4]; 4]) -> Result<Self, StrategyError> {
        validate_rows("S1", &probs)?;
        Ok(S1Table { probs })
    }

    pub fn uniform() -> Self {
        S1Table { probs: [[0.25; 4]; 4] }
    }

    pub fn rows(&self) -> &[[f64; 4]; 4] {
        &self.probs
    }

    pub fn row(&self, public: FitnessLevel, private: FitnessLevel) -> &[f64; 4] {
        &self.probs[s1_state_index(public, private)]
    }

    pub fn probability(&self, public: FitnessLevel, private: FitnessLevel, action: S1Action) -> f64 {
        self.row(public, private)[action.index()]
    }
}

/// 2×2 table: rows by new-point level, columns public then private.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct S2Table {
    probs: [[f64; 2]; 2],
}

impl S2Table {
    pub fn new(probs: [[f64; 2]; 2]) -> Result<Self, StrategyError> {
        validate_rows("S2", &probs)?;
        Ok(S2Table { probs })
    }

    pub fn uniform() -> Self {
        S2Table { probs: [[0.5; 2]; 2] }
    }

    pub fn rows(&self) -> &[[f64; 2]; 2] {
        &self.probs
    }

    pub fn row(&self, level: FitnessLevel) -> &[f64; 2] {
        &self.probs[level.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Strategy {
    pub s1: S1Table,
    pub s2: S2Table,
    pub label: String,
}

impl Strategy {
    pub fn new(s1: S1Table, s2: S2Table, label: impl Into<String>) -> Self {
        Strategy { s1, s2, label: label.into() }
    }

    pub fn uniform(label: impl Into<String>) -> Self {
        Strategy::new(S1Table::uniform(), S2Table::uniform(), label)
    }

    /// The example strategy used throughout the documentation and tests.
    pub fn table_example() -> Self {
        let s1 =
            S1Table::new([[0.1, 0.2, 0.3, 0.4], [0.0, 1.0, 0.0, 0.0], [0.005, 0.995, 0.0, 0.0], [0.0, 0.0, 0.9, 0.1]])
                .expect("valid rows");
        let s2 = S2Table::new([[0.25, 0.75], [0.7, 0.3]]).expect("valid rows");
        Strategy::new(s1, s2, "table-example")
    }

    pub fn select_s1(&self, public: FitnessLevel, private: FitnessLevel, rng: &mut crate::seed::Rng) -> S1Action {
        S1Action::ALL[sample_row(self.s1.row(public, private), rng)]
    }

    pub fn select_s2(&self, level: FitnessLevel, rng: &mut crate::seed::Rng) -> MemorySource {
        match sample_row(self.s2.row(level), rng) {
            0 => MemorySource::Public,
            _ => MemorySource::Private,
        }
    }

    /// S1 rows row-major (16 values) followed by S2 rows (4 values).
    pub fn to_vector(&self) -> [f64; 20] {
        let mut out = [0.0; 20];
        for (i, v) in self.s1.probs.iter().flatten().chain(self.s2.probs.iter().flatten()).enumerate() {
            out[i] = *v;
        }
        out
    }

    pub fn from_vector(values: &[f64], label: impl Into<String>) -> Result<Self, StrategyError> {
        if values.len() != 20 {
            return Err(StrategyError::VectorLength(values.len()));
        }
        let mut s1 = [[0.0; 4]; 4];
        let mut s2 = [[0.0; 2]; 2];
        for (i, row) in s1.iter_mut().enumerate() {
            row.copy_from_slice(&values[i * 4..i * 4 + 4]);
        }
        for (i, row) in s2.iter_mut().enumerate() {
            row.copy_from_slice(&values[16 + i * 2..18 + i * 2]);
        }
        Ok(Strategy::new(S1Table::new(s1)?, S2Table::new(s2)?, label))
    }

    /// Total probability mass on private-memory actions (S1 and S2).
    pub fn private_mass(&self) -> f64 {
        private_mass(&self.to_vector())
    }
}

/// Private-memory probability mass of a strategy vector.
pub fn private_mass(vector: &[f64]) -> f64 {
    let s1: f64 = (0..4).map(|r| vector[r * 4 + 1] + vector[r * 4 + 3]).sum();
    let s2: f64 = vector[17] + vector[19];
    s1 + s2
}

/// How often an agent found itself in each state during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateOccupancy {
    pub s1_counts: [u64; 4],
    pub s2_counts: [u64; 2],
}

impl StateOccupancy {
    pub fn record_s1(&mut self, public: FitnessLevel, private: FitnessLevel) {
        self.s1_counts[s1_state_index(public, private)] += 1;
    }

    pub fn record_s2(&mut self, level: FitnessLevel) {
        self.s2_counts[level.index()] += 1;
    }

    pub fn merge(&mut self, other: &StateOccupancy) {
        for (a, b) in self.s1_counts.iter_mut().zip(other.s1_counts) {
            *a += b;
        }
        for (a, b) in self.s2_counts.iter_mut().zip(other.s2_counts) {
            *a += b;
        }
    }

    /// Fractions in `[0, 1]`; all zero for a table with no samples.
    pub fn fractions(&self) -> ([f64; 4], [f64; 2]) {
        fn frac<const W: usize>(counts: &[u64; W]) -> [f64; W] {
            let total: u64 = counts.iter().sum();
            if total == 0 {
                return [0.0; W];
            }
            counts.map(|c| c as f64 / total as f64)
        }
        (frac(&self.s1_counts), frac(&self.s2_counts))
    }
}

/// One slice of a pie chart, angles in degrees clockwise from twelve o'clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PieSlice {
    pub action: usize,
    pub start_deg: f64,
    pub sweep_deg: f64,
}

/// One circle of the strategy pie chart (one table row).
#[derive(Debug, Clone, PartialEq)]
pub struct PieCircle {
    pub table: &'static str,
    pub state: &'static str,
    pub probabilities: Vec<f64>,
    pub slices: Vec<PieSlice>,
    /// Occupancy band arc, `None` when no occupancy was supplied.
    pub band_deg: Option<f64>,
    pub occupancy: Option<f64>,
}

/// Six circles: four S1 rows then two S2 rows.
pub fn pie_chart(strategy: &Strategy, occupancy: Option<&StateOccupancy>) -> Vec<PieCircle> {
    fn circle(table: &'static str, state: &'static str, probs: &[f64], share: Option<f64>) -> PieCircle {
        let mut slices = Vec::new();
        let mut start = 0.0;
        for (action, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                let sweep = 360.0 * p;
                slices.push(PieSlice { action, start_deg: start, sweep_deg: sweep });
                start += sweep;
            }
        }
        PieCircle {
            table,
            state,
            probabilities: probs.to_vec(),
            slices,
            band_deg: share.map(|s| 360.0 * s),
            occupancy: share,
        }
    }
    let fractions =
        occupancy.filter(|o| o.s1_counts.iter().chain(o.s2_counts.iter()).any(|&c| c > 0)).map(|o| o.fractions());
    let mut out = Vec::with_capacity(6);
    for (i, row) in strategy.s1.rows().iter().enumerate() {
        out.push(circle("S1", S1_ROW_LABELS[i], row, fractions.map(|f| f.0[i])));
    }
    for (i, row) in strategy.s2.rows().iter().enumerate() {
        out.push(circle("S2", S2_ROW_LABELS[i], row, fractions.map(|f| f.1[i])));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn discretize_threshold() {
        assert_eq!(discretize(0.3).unwrap(), FitnessLevel::Low);
        assert_eq!(discretize(0.7).unwrap(), FitnessLevel::High);
        assert_eq!(discretize(0.5).unwrap(), FitnessLevel::High);
        assert!(discretize(1.2).is_err());
        assert!(discretize(-0.1).is_err());
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_row([1.0; 4], SMALL_ROW_EPSILON), [0.25; 4]);
        assert_eq!(normalize_row([0.0; 4], SMALL_ROW_EPSILON), [0.25; 4]);
        assert_eq!(normalize_row([1e-8, 0.0, 0.0, 0.0], SMALL_ROW_EPSILON), [0.25; 4]);
        let r = normalize_row([0.2, 0.6, 0.2, 0.0], SMALL_ROW_EPSILON);
        for (a, b) in r.iter().zip([0.2, 0.6, 0.2, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn vector_layout() {
        let v = Strategy::table_example().to_vector();
        assert_eq!(&v[..8], &[0.1, 0.2, 0.3, 0.4, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(&v[16..], &[0.25, 0.75, 0.7, 0.3]);
        let u = Strategy::uniform("u").to_vector();
        assert!(u[..16].iter().all(|&x| x == 0.25) && u[16..].iter().all(|&x| x == 0.5));
        let back = Strategy::from_vector(&v, "table-example").unwrap();
        assert_eq!(back, Strategy::table_example());
        assert!(matches!(Strategy::from_vector(&v[..19], "x"), Err(StrategyError::VectorLength(19))));
    }

    #[test]
    fn invalid_tables_rejected() {
        assert!(S1Table::new([[0.5, 0.5, 0.1, 0.0]; 4]).is_err());
        assert!(S2Table::new([[1.5, -0.5], [0.5, 0.5]]).is_err());
    }

    #[test]
    fn deterministic_rows_always_pick_their_action() {
        let s = Strategy::table_example();
        let mut rng = seed::rng(1, &[]);
        for _ in 0..1000 {
            let a = s.select_s1(FitnessLevel::Low, FitnessLevel::High, &mut rng);
            assert_eq!(a.code(), "exploit-private");
            // (High, High) never exploits
            let b = s.select_s1(FitnessLevel::High, FitnessLevel::High, &mut rng);
            assert_eq!(b.method, SearchMethod::Explore);
        }
        let degenerate = Strategy::new(S1Table::uniform(), S2Table::new([[1.0, 0.0], [1.0, 0.0]]).unwrap(), "d");
        for _ in 0..1000 {
            assert_eq!(degenerate.select_s2(FitnessLevel::Low, &mut rng), MemorySource::Public);
        }
    }

    #[test]
    fn pie_angles() {
        let occupancy = StateOccupancy { s1_counts: [5, 10, 25, 60], s2_counts: [20, 80] };
        let circles = pie_chart(&Strategy::table_example(), Some(&occupancy));
        assert_eq!(circles.len(), 6);
        let sweeps: Vec<f64> = circles[0].slices.iter().map(|s| s.sweep_deg).collect();
        for (a, b) in sweeps.iter().zip([36.0, 72.0, 108.0, 144.0]) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((circles[3].band_deg.unwrap() - 216.0).abs() < 1e-9);
        // zero-probability actions produce no slice
        assert_eq!(circles[1].slices.len(), 1);
        assert!(pie_chart(&Strategy::table_example(), None).iter().all(|c| c.band_deg.is_none()));
    }
}
