//! Text file formats: strategy tables (TOML), genomes (line records) and
//! comma-separated tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cmas_core::cppn::{Activation, Genome, LinkGene, NodeGene, NodeKind};
use cmas_core::landscape::Point;
use cmas_core::simulation::RunTrace;
use cmas_core::sphereviz::{CellLocation, Scene};
use cmas_core::strategy::{S1Table, S2Table, Strategy, S1_ROW_LABELS, S2_ROW_LABELS};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Bit string with dimension 0 first.
pub fn point_to_string(p: Point) -> String {
    p.iter_bits().map(|b| if b { '1' } else { '0' }).collect()
}

pub fn parse_point(s: &str) -> Result<Point> {
    let bits: Vec<bool> = s
        .trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(HarnessError::config(format!("point {s:?} is not a bit string"))),
        })
        .collect::<Result<_>>()?;
    Point::from_bit_slice(&bits).map_err(|e| HarnessError::config(format!("point {s:?}: {e}")))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct S1Rows {
    low_low: [f64; 4],
    low_high: [f64; 4],
    high_low: [f64; 4],
    high_high: [f64; 4],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct S2Rows {
    low: [f64; 2],
    high: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategyFile {
    label: String,
    s1: S1Rows,
    s2: S2Rows,
}

const STRATEGY_HEADER: &str = "\
# S1 rows are (public, private) fitness levels; columns are
# exploit-public, exploit-private, explore-public, explore-private.
# S2 rows are the new point's level; columns are public, private.
";

pub fn strategy_to_toml(strategy: &Strategy) -> String {
    let r = strategy.s1.rows();
    let q = strategy.s2.rows();
    debug_assert_eq!(S1_ROW_LABELS, ["low_low", "low_high", "high_low", "high_high"]);
    debug_assert_eq!(S2_ROW_LABELS, ["low", "high"]);
    let file = StrategyFile {
        label: strategy.label.clone(),
        s1: S1Rows { low_low: r[0], low_high: r[1], high_low: r[2], high_high: r[3] },
        s2: S2Rows { low: q[0], high: q[1] },
    };
    let body = toml::to_string(&file).expect("strategy tables serialize");
    format!("{STRATEGY_HEADER}{body}")
}

pub fn strategy_from_toml(text: &str) -> Result<Strategy, String> {
    let f: StrategyFile = toml::from_str(text).map_err(|e| e.to_string())?;
    let s1 = S1Table::new([f.s1.low_low, f.s1.low_high, f.s1.high_low, f.s1.high_high]).map_err(|e| e.to_string())?;
    let s2 = S2Table::new([f.s2.low, f.s2.high]).map_err(|e| e.to_string())?;
    Ok(Strategy::new(s1, s2, f.label))
}

pub fn read_strategy(path: &Path) -> Result<Strategy> {
    let text = fs::read_to_string(path).map_err(HarnessError::io(path))?;
    strategy_from_toml(&text).map_err(|message| HarnessError::Parse { path: path.into(), message })
}

/// One record per line: `node <id> <kind> <activation>` or
/// `link <innovation> <from> <to> <weight> <enabled>`. Weights are written
/// in shortest round-trip form.
pub fn genome_to_text(genome: &Genome) -> String {
    let mut out = String::from("# cmas genome v1\n");
    for n in genome.nodes() {
        writeln!(out, "node {} {} {}", n.id, n.kind.label(), n.activation.label()).unwrap();
    }
    for l in genome.links() {
        writeln!(out, "link {} {} {} {:?} {}", l.innovation, l.from, l.to, l.weight, u8::from(l.enabled)).unwrap();
    }
    out
}

pub fn genome_from_text(text: &str) -> Result<Genome, String> {
    let mut nodes = Vec::new();
    let mut links = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |m: &str| format!("line {}: {m}", i + 1);
        let f: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<u64>().map_err(|_| at(&format!("bad integer {s:?}")));
        match f.as_slice() {
            ["node", id, kind, act] => nodes.push(NodeGene {
                id: u32::try_from(num(id)?).map_err(|_| at("node id too large"))?,
                kind: NodeKind::from_label(kind).ok_or_else(|| at(&format!("unknown node kind {kind:?}")))?,
                activation: Activation::from_label(act).ok_or_else(|| at(&format!("unknown activation {act:?}")))?,
            }),
            ["link", innov, from, to, w, en] => links.push(LinkGene {
                innovation: num(innov)?,
                from: u32::try_from(num(from)?).map_err(|_| at("node id too large"))?,
                to: u32::try_from(num(to)?).map_err(|_| at("node id too large"))?,
                weight: w.parse().map_err(|_| at(&format!("bad weight {w:?}")))?,
                enabled: match *en {
                    "1" => true,
                    "0" => false,
                    _ => return Err(at("enabled flag must be 0 or 1")),
                },
            }),
            _ => return Err(at("expected a node or link record")),
        }
    }
    Genome::new(nodes, links).map_err(|e| e.to_string())
}

pub fn read_genome(path: &Path) -> Result<Genome> {
    let text = fs::read_to_string(path).map_err(HarnessError::io(path))?;
    genome_from_text(&text).map_err(|message| HarnessError::Parse { path: path.into(), message })
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: u32,
    pub agent: u32,
    pub position: String,
    pub fitness: f64,
    pub evaluations: u32,
    pub moved: bool,
    pub public_level: Option<&'static str>,
    pub private_level: Option<&'static str>,
    pub action: Option<&'static str>,
    pub new_point_level: Option<&'static str>,
    pub destination: Option<&'static str>,
}

pub fn trace_rows(trace: &RunTrace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            step: r.step,
            agent: r.agent,
            position: point_to_string(r.position),
            fitness: r.fitness,
            evaluations: r.evaluations,
            moved: r.moved,
            public_level: r.state.map(|s| s.0.label()),
            private_level: r.state.map(|s| s.1.label()),
            action: r.action.map(|a| a.code()),
            new_point_level: r.placement.map(|p| p.0.label()),
            destination: r.placement.map(|p| p.1.label()),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightRow {
    pub ring: usize,
    pub slot: usize,
    pub point: String,
    pub latitude: f64,
    pub longitude: f64,
    pub fitness: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub fn heightfield_rows(scene: &Scene) -> Vec<HeightRow> {
    scene
        .vertices
        .iter()
        .map(|v| HeightRow {
            ring: v.ring,
            slot: v.slot,
            point: point_to_string(v.point),
            latitude: v.latitude,
            longitude: v.longitude,
            fitness: v.fitness,
            x: v.position.x,
            y: v.position.y,
            z: v.position.z,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkerRow {
    pub kind: &'static str,
    pub point: String,
    pub distance: usize,
    /// Grid slot, or the diamond cell for off-grid points.
    pub slot: Option<usize>,
    pub cell: Option<usize>,
    pub latitude: f64,
    pub longitude: f64,
    pub fitness: f64,
}

pub fn marker_rows(scene: &Scene) -> Vec<MarkerRow> {
    scene
        .markers
        .iter()
        .map(|m| {
            let (slot, cell) = match m.placement.location {
                CellLocation::Grid { slot } => (Some(slot), None),
                CellLocation::Cell { cell, .. } => (None, Some(cell)),
            };
            MarkerRow {
                kind: m.kind.label(),
                point: point_to_string(m.placement.point),
                distance: m.placement.distance,
                slot,
                cell,
                latitude: m.placement.latitude,
                longitude: m.placement.longitude,
                fitness: m.fitness,
            }
        })
        .collect()
}
