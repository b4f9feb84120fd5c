//! Deterministic discrete-event gossip network replicating the ledger.

mod sim;
mod trace;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::Hash32;
use crate::ledger::ApplyOutcome;

pub use sim::Simulation;
pub use trace::{TraceEvent, TraceKind};

pub type PeerId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Byzantine {
    /// Swallows vote transactions.
    CensorVotes,
    /// Swallows registration transactions.
    CensorRegistrations,
    /// Re-sends everything it hears, including duplicates and rejects.
    ReplayDuplicates,
    /// Never sends anything.
    Silent,
}

/// Links between `side` and the remaining peers are cut during
/// `[start, end)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionWindow {
    pub start: u64,
    pub end: u64,
    pub side: BTreeSet<PeerId>,
}

impl PartitionWindow {
    pub fn separates(&self, a: PeerId, b: PeerId, tick: u64) -> bool {
        tick >= self.start && tick < self.end && self.side.contains(&a) != self.side.contains(&b)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConfig {
    pub peer_count: usize,
    /// Inclusive uniform latency range in ticks.
    pub latency: (u64, u64),
    /// Loss probability per message.
    pub drop_rate: f64,
    pub fanout: usize,
    /// Anti-entropy period in ticks; 0 disables pull sync.
    pub sync_interval: u64,
    pub partitions: Vec<PartitionWindow>,
    pub byzantine: BTreeMap<PeerId, Byzantine>,
    /// Record an event trace.
    pub trace: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            peer_count: 4,
            latency: (1, 3),
            drop_rate: 0.0,
            fanout: 3,
            sync_interval: 5,
            partitions: Vec::new(),
            byzantine: BTreeMap::new(),
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unknown peer {0}")]
    UnknownPeer(PeerId),
    #[error("invalid network configuration: {0}")]
    InvalidConfig(&'static str),
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.peer_count == 0 {
            return Err(SimError::InvalidConfig("peer_count must be positive"));
        }
        if !(0.0..=1.0).contains(&self.drop_rate) {
            return Err(SimError::InvalidConfig("drop_rate must lie in [0, 1]"));
        }
        if self.fanout == 0 {
            return Err(SimError::InvalidConfig("fanout must be at least 1"));
        }
        if self.latency.0 > self.latency.1 {
            return Err(SimError::InvalidConfig("latency range is inverted"));
        }
        if self
            .partitions
            .iter()
            .any(|p| p.start > p.end || p.side.iter().any(|&s| s >= self.peer_count))
        {
            return Err(SimError::InvalidConfig("bad partition window"));
        }
        if self.byzantine.keys().any(|&p| p >= self.peer_count) {
            return Err(SimError::InvalidConfig("byzantine peer out of range"));
        }
        Ok(())
    }
}

/// What happened to a transaction handed to its home peer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubmitResult {
    Ledger(ApplyOutcome),
    /// The home peer had already seen this transaction.
    AlreadySeen,
    /// A byzantine home peer swallowed it.
    Swallowed,
}

impl SubmitResult {
    pub fn is_accepted(&self) -> bool {
        matches!(self, SubmitResult::Ledger(o) if o.is_accepted())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeerSummary {
    pub peer: PeerId,
    pub honest: bool,
    #[serde(serialize_with = "hex_hash")]
    pub state_hash: Hash32,
    pub records: usize,
}

fn hex_hash<S: serde::Serializer>(h: &Hash32, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&hex::encode(h))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceReport {
    pub tick: u64,
    /// All honest peers hold identical ledger hashes.
    pub converged: bool,
    pub peers: Vec<PeerSummary>,
    pub messages_sent: u64,
    pub messages_dropped: u64,
}

impl ConvergenceReport {
    pub fn honest_hash(&self) -> Option<Hash32> {
        let mut honest = self.peers.iter().filter(|p| p.honest);
        let first = honest.next()?.state_hash;
        honest.all(|p| p.state_hash == first).then_some(first)
    }
}
