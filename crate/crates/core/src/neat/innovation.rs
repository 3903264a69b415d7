use hashbrown::HashMap;
use rustc_hash::FxBuildHasher;

/// Numbers handed out for splitting the link `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeSplit {
    pub node: u32,
    pub in_link: u64,
    pub out_link: u64,
    pub bias_link: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Change {
    AddLink,
    AddNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Assigned {
    Link(u64),
    Node(NodeSplit),
}

/// Global innovation and node counters plus this generation's structural
/// changes, so that identical changes made by different genomes in one
/// generation share numbers.
#[derive(Debug, Clone, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InnovationRegistry {
    next_innovation: u64,
    next_node: u32,
    #[cfg_attr(feature = "serde", serde(skip))]
    current: HashMap<(u32, u32, Change), Assigned, FxBuildHasher>,
}

impl PartialEq for InnovationRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.next_innovation == other.next_innovation && self.next_node == other.next_node
    }
}

impl InnovationRegistry {
    pub fn new(next_innovation: u64, next_node: u32) -> Self {
        InnovationRegistry { next_innovation, next_node, current: HashMap::default() }
    }

    pub fn next_innovation(&self) -> u64 {
        self.next_innovation
    }

    pub fn next_node(&self) -> u32 {
        self.next_node
    }

    /// Forgets this generation's changes; counters keep increasing.
    pub fn begin_generation(&mut self) {
        self.current.clear();
    }

    fn fresh(&mut self) -> u64 {
        let i = self.next_innovation;
        self.next_innovation += 1;
        i
    }

    pub fn link(&mut self, from: u32, to: u32) -> u64 {
        if let Some(Assigned::Link(i)) = self.current.get(&(from, to, Change::AddLink)) {
            return *i;
        }
        let i = self.fresh();
        self.current.insert((from, to, Change::AddLink), Assigned::Link(i));
        i
    }

    pub fn split(&mut self, from: u32, to: u32) -> NodeSplit {
        if let Some(Assigned::Node(s)) = self.current.get(&(from, to, Change::AddNode)) {
            return *s;
        }
        let node = self.next_node;
        self.next_node += 1;
        let split = NodeSplit { node, in_link: self.fresh(), out_link: self.fresh(), bias_link: self.fresh() };
        self.current.insert((from, to, Change::AddNode), Assigned::Node(split));
        split
    }
}
