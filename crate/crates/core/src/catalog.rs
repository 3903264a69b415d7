//! The six hand-coded opponent strategies.
//!
//! Each always uses one search method and reads either the public memory,
//! the private memory, or one of the two at random. New points go to the
//! memory the strategy reads (split evenly for "either").

use alloc::format;
use alloc::vec::Vec;

use crate::strategy::{MemorySource, S1Table, S2Table, SearchMethod, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MemoryChoice {
    Public,
    Private,
    Either,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ManualStrategy {
    pub method: SearchMethod,
    pub memory: MemoryChoice,
}

impl ManualStrategy {
    /// Catalog order matches the standard environment numbering 1..=6.
    pub const ALL: [ManualStrategy; 6] = [
        ManualStrategy { method: SearchMethod::Exploit, memory: MemoryChoice::Public },
        ManualStrategy { method: SearchMethod::Explore, memory: MemoryChoice::Public },
        ManualStrategy { method: SearchMethod::Exploit, memory: MemoryChoice::Private },
        ManualStrategy { method: SearchMethod::Explore, memory: MemoryChoice::Private },
        ManualStrategy { method: SearchMethod::Exploit, memory: MemoryChoice::Either },
        ManualStrategy { method: SearchMethod::Explore, memory: MemoryChoice::Either },
    ];

    pub fn name(self) -> &'static str {
        match (self.method, self.memory) {
            (SearchMethod::Exploit, MemoryChoice::Public) => "exploit-public",
            (SearchMethod::Exploit, MemoryChoice::Private) => "exploit-private",
            (SearchMethod::Exploit, MemoryChoice::Either) => "exploit-either",
            (SearchMethod::Explore, MemoryChoice::Public) => "explore-public",
            (SearchMethod::Explore, MemoryChoice::Private) => "explore-private",
            (SearchMethod::Explore, MemoryChoice::Either) => "explore-either",
        }
    }

    pub fn by_name(name: &str) -> Option<ManualStrategy> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn strategy(self) -> Strategy {
        let (public, private) = match self.memory {
            MemoryChoice::Public => (1.0, 0.0),
            MemoryChoice::Private => (0.0, 1.0),
            MemoryChoice::Either => (0.5, 0.5),
        };
        let offset = match self.method {
            SearchMethod::Exploit => 0,
            SearchMethod::Explore => 2,
        };
        let mut row = [0.0; 4];
        row[offset + MemorySource::Public as usize] = public;
        row[offset + MemorySource::Private as usize] = private;
        let s1 = S1Table::new([row; 4]).expect("catalog rows are distributions");
        let s2 = S2Table::new([[public, private]; 2]).expect("catalog rows are distributions");
        Strategy::new(s1, s2, self.name())
    }
}

pub fn names() -> Vec<&'static str> {
    ManualStrategy::ALL.iter().map(|s| s.name()).collect()
}

pub fn describe(strategy: ManualStrategy) -> alloc::string::String {
    format!(
        "always {} with {} memory",
        strategy.name().split('-').next().unwrap_or(""),
        match strategy.memory {
            MemoryChoice::Public => "public",
            MemoryChoice::Private => "private",
            MemoryChoice::Either => "either",
        }
    )
}
