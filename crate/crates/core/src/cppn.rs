//! Compositional pattern-producing networks that generate strategy tables.
//!
//! A genome has four inputs, a bias and two outputs. Decoding queries the
//! network once per table cell with each state and action index encoded as
//! `-1` (index 0) or `+1` (index 1), squashes the first output into `(0, 1)`
//! for `S1` cells and the second for `S2` cells, and normalizes each row.

use alloc::vec;
use alloc::vec::Vec;

use crate::strategy::{normalize_row, S1Table, S2Table, Strategy, SMALL_ROW_EPSILON};

pub const NUM_INPUTS: usize = 4;
pub const NUM_OUTPUTS: usize = 2;
pub const BIAS_ID: u32 = 4;
pub const OUTPUT_IDS: [u32; NUM_OUTPUTS] = [5, 6];
pub const FIRST_HIDDEN_ID: u32 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum NodeKind {
    Input,
    Bias,
    Hidden,
    Output,
}

impl NodeKind {
    pub fn label(self) -> &'static str {
        match self {
            NodeKind::Input => "input",
            NodeKind::Bias => "bias",
            NodeKind::Hidden => "hidden",
            NodeKind::Output => "output",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [NodeKind::Input, NodeKind::Bias, NodeKind::Hidden, NodeKind::Output].into_iter().find(|k| k.label() == s)
    }

    /// Whether the node computes a value from incoming links.
    pub fn is_computed(self) -> bool {
        matches!(self, NodeKind::Hidden | NodeKind::Output)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Activation {
    /// Logistic `1 / (1 + e^-x)`.
    Sigmoid,
    /// `e^(-x^2)`.
    Gaussian,
    Sine,
    Linear,
}

impl Activation {
    pub const ALL: [Activation; 4] = [Activation::Sigmoid, Activation::Gaussian, Activation::Sine, Activation::Linear];

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => logistic(x),
            Activation::Gaussian => libm::exp(-x * x),
            Activation::Sine => libm::sin(x),
            Activation::Linear => x,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Gaussian => "gaussian",
            Activation::Sine => "sine",
            Activation::Linear => "linear",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.label() == s)
    }
}

#[inline]
fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodeGene {
    pub id: u32,
    pub kind: NodeKind,
    pub activation: Activation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinkGene {
    pub innovation: u64,
    pub from: u32,
    pub to: u32,
    pub weight: f64,
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CppnError {
    #[error("genome needs inputs 0..4, bias 4 and outputs 5 and 6: {0}")]
    Layout(&'static str),
    #[error("duplicate node id {0}")]
    DuplicateNode(u32),
    #[error("duplicate innovation number {0}")]
    DuplicateInnovation(u64),
    #[error("link {innovation} references missing node {node}")]
    MissingNode { innovation: u64, node: u32 },
    #[error("link {0} ends at an input or bias node")]
    IntoInput(u64),
    #[error("link {0} has a non-finite weight")]
    Weight(u64),
    #[error("links form a cycle")]
    Cycle,
}

/// A validated acyclic CPPN genome.
///
/// Nodes are kept sorted by id and links by innovation number.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "GenomeGenes"))]
pub struct Genome {
    nodes: Vec<NodeGene>,
    links: Vec<LinkGene>,
}

/// Unvalidated gene lists; deserialization goes through [`Genome::new`].
#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
struct GenomeGenes {
    nodes: Vec<NodeGene>,
    links: Vec<LinkGene>,
}

#[cfg(feature = "serde")]
impl TryFrom<GenomeGenes> for Genome {
    type Error = CppnError;

    fn try_from(g: GenomeGenes) -> Result<Self, CppnError> {
        Genome::new(g.nodes, g.links)
    }
}

impl Genome {
    pub fn new(mut nodes: Vec<NodeGene>, mut links: Vec<LinkGene>) -> Result<Self, CppnError> {
        nodes.sort_by_key(|n| n.id);
        links.sort_by_key(|l| l.innovation);
        for w in nodes.windows(2) {
            if w[0].id == w[1].id {
                return Err(CppnError::DuplicateNode(w[0].id));
            }
        }
        for w in links.windows(2) {
            if w[0].innovation == w[1].innovation {
                return Err(CppnError::DuplicateInnovation(w[0].innovation));
            }
        }
        if nodes.len() < FIRST_HIDDEN_ID as usize {
            return Err(CppnError::Layout("too few nodes"));
        }
        for (i, n) in nodes.iter().enumerate() {
            let expected = match i as u32 {
                0..=3 => Some(NodeKind::Input),
                BIAS_ID => Some(NodeKind::Bias),
                5 | 6 => Some(NodeKind::Output),
                _ => None,
            };
            match expected {
                Some(kind) if n.id != i as u32 || n.kind != kind => {
                    return Err(CppnError::Layout("fixed node ids out of place"))
                }
                None if n.kind != NodeKind::Hidden => return Err(CppnError::Layout("extra nodes must be hidden")),
                _ => {}
            }
        }
        let genome = Genome { nodes, links };
        for l in &genome.links {
            for node in [l.from, l.to] {
                if genome.node(node).is_none() {
                    return Err(CppnError::MissingNode { innovation: l.innovation, node });
                }
            }
            if l.to <= BIAS_ID {
                return Err(CppnError::IntoInput(l.innovation));
            }
            if !l.weight.is_finite() {
                return Err(CppnError::Weight(l.innovation));
            }
        }
        if genome.topological_order().is_none() {
            return Err(CppnError::Cycle);
        }
        Ok(genome)
    }

    /// Inputs and bias each linked to both outputs; `weights` in
    /// innovation order (source-major). Outputs start linear.
    pub fn minimal(weights: [f64; 10]) -> Self {
        let mut nodes: Vec<NodeGene> = (0..NUM_INPUTS as u32)
            .map(|id| NodeGene { id, kind: NodeKind::Input, activation: Activation::Linear })
            .collect();
        nodes.push(NodeGene { id: BIAS_ID, kind: NodeKind::Bias, activation: Activation::Linear });
        for id in OUTPUT_IDS {
            nodes.push(NodeGene { id, kind: NodeKind::Output, activation: Activation::Linear });
        }
        let mut links = Vec::with_capacity(10);
        for from in 0..=BIAS_ID {
            for (o, &to) in OUTPUT_IDS.iter().enumerate() {
                let innovation = (from as usize * NUM_OUTPUTS + o) as u64;
                links.push(LinkGene { innovation, from, to, weight: weights[innovation as usize], enabled: true });
            }
        }
        Genome { nodes, links }
    }

    pub fn nodes(&self) -> &[NodeGene] {
        &self.nodes
    }

    pub fn links(&self) -> &[LinkGene] {
        &self.links
    }

    pub fn node(&self, id: u32) -> Option<&NodeGene> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok().map(|i| &self.nodes[i])
    }

    pub fn link(&self, innovation: u64) -> Option<&LinkGene> {
        self.links.binary_search_by_key(&innovation, |l| l.innovation).ok().map(|i| &self.links[i])
    }

    pub fn has_link_between(&self, from: u32, to: u32) -> bool {
        self.links.iter().any(|l| l.from == from && l.to == to)
    }

    pub fn max_node_id(&self) -> u32 {
        self.nodes.last().map_or(0, |n| n.id)
    }

    pub fn hidden_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Hidden).count()
    }

    pub fn enabled_link_count(&self) -> usize {
        self.links.iter().filter(|l| l.enabled).count()
    }

    /// Whether `to` can reach `from` over any link (enabled or not), so that
    /// adding `from -> to` would close a cycle.
    pub fn would_cycle(&self, from: u32, to: u32) -> bool {
        if from == to {
            return true;
        }
        let mut stack = vec![to];
        let mut seen = vec![false; self.max_node_id() as usize + 1];
        while let Some(n) = stack.pop() {
            if n == from {
                return true;
            }
            if core::mem::replace(&mut seen[n as usize], true) {
                continue;
            }
            stack.extend(self.links.iter().filter(|l| l.from == n).map(|l| l.to));
        }
        false
    }

    /// Node indices in an order where every link points forward; `None` if
    /// the links (enabled or disabled) contain a cycle.
    fn topological_order(&self) -> Option<Vec<usize>> {
        let index = |id: u32| self.nodes.binary_search_by_key(&id, |n| n.id).ok();
        let mut indegree = vec![0usize; self.nodes.len()];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for l in &self.links {
            let (a, b) = (index(l.from)?, index(l.to)?);
            indegree[b] += 1;
            out[a].push(b);
        }
        let mut ready: Vec<usize> = (0..self.nodes.len()).rev().filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(i) = ready.pop() {
            order.push(i);
            for &j in &out[i] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push(j);
                }
            }
        }
        (order.len() == self.nodes.len()).then_some(order)
    }

    /// Replaces the gene lists, revalidating.
    pub fn with_genes(&self, nodes: Vec<NodeGene>, links: Vec<LinkGene>) -> Result<Self, CppnError> {
        Genome::new(nodes, links)
    }

    pub(crate) fn links_mut(&mut self) -> &mut [LinkGene] {
        &mut self.links
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut [NodeGene] {
        &mut self.nodes
    }

    pub fn compile(&self) -> Network {
        Network::new(self)
    }

    pub fn activate(&self, inputs: [f64; NUM_INPUTS]) -> [f64; NUM_OUTPUTS] {
        self.compile().activate(inputs)
    }
}

/// Computed node: slot, activation, incoming `(slot, weight)`.
type Step = (usize, Activation, Vec<(usize, f64)>);

/// A genome flattened into evaluation order.
#[derive(Debug, Clone)]
pub struct Network {
    steps: Vec<Step>,
    slots: usize,
    outputs: [usize; NUM_OUTPUTS],
}

impl Network {
    fn new(genome: &Genome) -> Self {
        let order = genome.topological_order().expect("validated genomes are acyclic");
        let slot_of = |id: u32| genome.nodes.binary_search_by_key(&id, |n| n.id).expect("validated link");
        let mut steps = Vec::new();
        for i in order {
            let node = genome.nodes[i];
            if !node.kind.is_computed() {
                continue;
            }
            let incoming = genome
                .links
                .iter()
                .filter(|l| l.enabled && l.to == node.id)
                .map(|l| (slot_of(l.from), l.weight))
                .collect();
            steps.push((i, node.activation, incoming));
        }
        Network { steps, slots: genome.nodes.len(), outputs: OUTPUT_IDS.map(|id| id as usize) }
    }

    pub fn activate(&self, inputs: [f64; NUM_INPUTS]) -> [f64; NUM_OUTPUTS] {
        let mut values = vec![0.0; self.slots];
        values[..NUM_INPUTS].copy_from_slice(&inputs);
        values[BIAS_ID as usize] = 1.0;
        for (slot, activation, incoming) in &self.steps {
            let sum: f64 = incoming.iter().map(|&(s, w)| values[s] * w).sum();
            values[*slot] = activation.apply(sum);
        }
        self.outputs.map(|s| values[s])
    }
}

/// Maps a raw output into `(0, 1)` before row normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Squash {
    #[default]
    Logistic,
    Gaussian,
}

impl Squash {
    pub fn apply(self, x: f64) -> f64 {
        let v = match self {
            Squash::Logistic => logistic(x),
            Squash::Gaussian => libm::exp(-x * x),
        };
        if v.is_nan() {
            0.5
        } else {
            v
        }
    }
}

#[inline]
fn signed(index: usize) -> f64 {
    if index == 0 {
        -1.0
    } else {
        1.0
    }
}

/// Builds the strategy tables a genome encodes.
pub fn decode_strategy(genome: &Genome, squash: Squash, label: impl Into<alloc::string::String>) -> Strategy {
    let net = genome.compile();
    let mut s1 = [[0.0; 4]; 4];
    for (state, row) in s1.iter_mut().enumerate() {
        let (public, private) = (state / 2, state % 2);
        let mut raw = [0.0; 4];
        for (action, cell) in raw.iter_mut().enumerate() {
            let (method, source) = (action / 2, action % 2);
            let out = net.activate([signed(public), signed(private), signed(method), signed(source)]);
            *cell = squash.apply(out[0]);
        }
        *row = normalize_row(raw, SMALL_ROW_EPSILON);
    }
    let mut s2 = [[0.0; 2]; 2];
    for (level, row) in s2.iter_mut().enumerate() {
        let mut raw = [0.0; 2];
        for (destination, cell) in raw.iter_mut().enumerate() {
            let out = net.activate([signed(level), 0.0, 0.0, signed(destination)]);
            *cell = squash.apply(out[1]);
        }
        *row = normalize_row(raw, SMALL_ROW_EPSILON);
    }
    Strategy::new(
        S1Table::new(s1).expect("normalized rows are distributions"),
        S2Table::new(s2).expect("normalized rows are distributions"),
        label,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input_to_output(w: f64) -> Genome {
        let mut weights = [0.0; 10];
        weights[0] = w; // input 0 -> output 5
        Genome::minimal(weights)
    }

    #[test]
    fn zero_weights_give_activation_of_zero() {
        let g = Genome::minimal([0.0; 10]);
        assert_eq!(g.activate([1.0, -1.0, 1.0, -1.0]), [0.0, 0.0]);
        let mut nodes = g.nodes().to_vec();
        nodes[5].activation = Activation::Sigmoid;
        nodes[6].activation = Activation::Gaussian;
        let g = Genome::new(nodes, g.links().to_vec()).unwrap();
        assert_eq!(g.activate([1.0, 1.0, 1.0, 1.0]), [0.5, 1.0]);
    }

    #[test]
    fn single_link_is_linear() {
        let g = input_to_output(1.7);
        assert_eq!(g.activate([-1.0, 0.3, 0.0, 0.0])[0], -1.7);
    }

    #[test]
    fn rejects_cycles_and_bad_layouts() {
        let g = Genome::minimal([1.0; 10]);
        let mut nodes = g.nodes().to_vec();
        nodes.push(NodeGene { id: 7, kind: NodeKind::Hidden, activation: Activation::Sine });
        nodes.push(NodeGene { id: 8, kind: NodeKind::Hidden, activation: Activation::Sine });
        let mut links = g.links().to_vec();
        links.push(LinkGene { innovation: 10, from: 7, to: 8, weight: 1.0, enabled: true });
        links.push(LinkGene { innovation: 11, from: 8, to: 7, weight: 1.0, enabled: false });
        assert_eq!(Genome::new(nodes.clone(), links.clone()), Err(CppnError::Cycle));
        links.pop();
        assert!(Genome::new(nodes.clone(), links.clone()).is_ok());
        links.push(LinkGene { innovation: 12, from: 7, to: 2, weight: 1.0, enabled: true });
        assert_eq!(Genome::new(nodes.clone(), links.clone()), Err(CppnError::IntoInput(12)));
        links.pop();
        links.push(LinkGene { innovation: 3, from: 7, to: 5, weight: 1.0, enabled: true });
        assert_eq!(Genome::new(nodes.clone(), links), Err(CppnError::DuplicateInnovation(3)));
        nodes.remove(4);
        assert!(matches!(Genome::new(nodes, vec![]), Err(CppnError::Layout(_))));
    }

    #[test]
    fn constant_outputs_decode_uniform() {
        let s = decode_strategy(&Genome::minimal([0.0; 10]), Squash::Logistic, "c");
        assert!(s.s1.rows().iter().all(|r| *r == [0.25; 4]));
        assert!(s.s2.rows().iter().all(|r| *r == [0.5; 2]));
    }

    #[test]
    fn source_input_shifts_mass_to_private_actions() {
        // output 1 = I4: private-source cells get logistic(1), public logistic(-1)
        let mut w = [0.0; 10];
        w[3 * 2] = 1.0;
        let s = decode_strategy(&Genome::minimal(w), Squash::Logistic, "src");
        let (lo, hi) = (logistic(-1.0), logistic(1.0));
        let expect_pub = lo / (2.0 * (lo + hi));
        for row in s.s1.rows() {
            assert!((row[0] - expect_pub).abs() < 1e-12 && (row[2] - expect_pub).abs() < 1e-12);
            assert!((row[1] + row[3] - 2.0 * hi / (2.0 * (lo + hi))).abs() < 1e-12);
            assert!(row[1] > row[0]);
        }
        assert!(s.s2.rows().iter().all(|r| *r == [0.5; 2]));
    }
}
