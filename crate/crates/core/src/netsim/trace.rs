use std::fmt;

use super::PeerId;
use crate::hash::Hash32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TraceKind {
    Submit,
    Applied,
    Superseded,
    Rejected,
    Duplicate,
    Dropped,
    Partitioned,
    Censored,
    Synced,
    PartitionStart,
    PartitionEnd,
}

impl TraceKind {
    pub fn name(self) -> &'static str {
        match self {
            TraceKind::Submit => "submit",
            TraceKind::Applied => "applied",
            TraceKind::Superseded => "superseded",
            TraceKind::Rejected => "rejected",
            TraceKind::Duplicate => "duplicate",
            TraceKind::Dropped => "dropped",
            TraceKind::Partitioned => "partitioned",
            TraceKind::Censored => "censored",
            TraceKind::Synced => "synced",
            TraceKind::PartitionStart => "partition-start",
            TraceKind::PartitionEnd => "partition-end",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub tick: u64,
    pub peer: PeerId,
    pub kind: TraceKind,
    pub tx: Option<Hash32>,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} ", self.tick, self.peer, self.kind.name())?;
        match &self.tx {
            Some(h) => write!(f, "{}", hex::encode(h)),
            None => f.write_str("-"),
        }
    }
}
