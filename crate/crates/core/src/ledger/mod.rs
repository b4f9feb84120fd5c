//! Bulletin-board state machine: transactions, validation, tallying, and
//! public audit of exported ledgers.

mod audit;
mod config;
mod dump;
pub mod merkle;
mod state;
mod tx;

use serde::Serialize;
use thiserror::Error;

pub use audit::{audit, audit_bytes, AuditCheck, AuditReport};
pub use config::{ConfigError, ElectionConfig, PhaseSchedule, CHOICE_COUNT};
pub use dump::{Claim, DecodedDump, DumpError, LedgerDump, DUMP_MAGIC, DUMP_VERSION};
pub use merkle::MerkleTree;
pub use state::{ApplyOutcome, LedgerState, RecordKey};
pub use tx::{Transaction, TxKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Phase {
    #[default]
    Setup,
    Registration,
    Voting,
    Tally,
    Closed,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Error)]
pub enum RejectReason {
    #[error("transaction not allowed in the current phase")]
    WrongPhase,
    #[error("transaction arrived after its phase closed")]
    LateArrival,
    #[error("unknown election")]
    UnknownElection,
    #[error("invalid proof: {0}")]
    InvalidProof(String),
    #[error("commitment does not match the presented credential")]
    CommitmentMismatch,
    #[error("duplicate commitment")]
    DuplicateCommitment,
    #[error("duplicate nullifier")]
    DuplicateNullifier,
    #[error("duplicate share index")]
    DuplicateShareIndex,
    #[error("configuration already set")]
    ConfigAlreadySet,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("ballot box is empty")]
    EmptyBallotBox,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("no election configuration")]
    NoConfig,
    #[error("operation not available in the current phase")]
    WrongPhase,
    #[error("ballot box is empty")]
    EmptyBallotBox,
    #[error("need {needed} shares, have {got}")]
    InsufficientShares { needed: u16, got: usize },
    #[error("share combination failed")]
    CombinationFailure,
    #[error("decrypted tally exceeds the number of ballots")]
    InconsistentTally,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TallyResult {
    pub yes_count: u64,
    pub no_count: u64,
    pub total_votes: u64,
}

/// Replay `(tick, tx)` records through a fresh state, returning each outcome.
pub fn replay<'a, I>(records: I) -> (LedgerState, Vec<ApplyOutcome>)
where
    I: IntoIterator<Item = (u64, &'a Transaction)>,
{
    let mut state = LedgerState::new();
    let outcomes = records
        .into_iter()
        .map(|(tick, tx)| {
            state.advance_phase(tick);
            state.apply(tx, tick)
        })
        .collect();
    (state, outcomes)
}

#[cfg(test)]
mod tests;
