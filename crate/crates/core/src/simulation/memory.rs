use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::landscape::Point;

/// A point with the fitness it had when it was stored.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MemoryEntry {
    pub point: Point,
    pub stored_fitness: f64,
    pub inserted_step: u32,
    pub owner: u32,
}

impl MemoryEntry {
    /// Best-first ranking: higher stored fitness, then earlier step, then
    /// lexicographically smaller point, then lower owner id.
    pub fn rank(&self, other: &MemoryEntry) -> Ordering {
        other
            .stored_fitness
            .total_cmp(&self.stored_fitness)
            .then(self.inserted_step.cmp(&other.inserted_step))
            .then(self.point.cmp(&other.point))
            .then(self.owner.cmp(&other.owner))
    }

    /// Order used when merging a step's public updates.
    pub fn merge_order(&self, other: &MemoryEntry) -> Ordering {
        other
            .stored_fitness
            .total_cmp(&self.stored_fitness)
            .then(self.point.cmp(&other.point))
            .then(self.owner.cmp(&other.owner))
    }
}

/// Append-only store with a cached best entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Memory {
    entries: Vec<MemoryEntry>,
    best: Option<usize>,
}

impl Memory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, entry: MemoryEntry) {
        let replace = match self.best {
            None => true,
            Some(b) => entry.rank(&self.entries[b]) == Ordering::Less,
        };
        self.entries.push(entry);
        if replace {
            self.best = Some(self.entries.len() - 1);
        }
    }

    pub fn best(&self) -> Option<&MemoryEntry> {
        self.best.map(|b| &self.entries[b])
    }

    pub fn entries(&self) -> &[MemoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
