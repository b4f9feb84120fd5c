use std::collections::BTreeMap;

use super::config::ElectionConfig;
use super::merkle::MerkleTree;
use super::tx::{Transaction, TxKind};
use super::{LedgerError, Phase, RejectReason, TallyResult};
use crate::codec::Writer;
use crate::credentials::verify_presentation;
use crate::hash::{self, tag, Hash32};
use crate::hebackend::{combine, sum, Ciphertext, HeError, PartialDecryption};
use crate::zkproofs::{verify_share, verify_vote, ShareCorrectnessProof, VoteStatement};

/// Position of an accepted transaction in the canonical record order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecordKey {
    pub tick: u64,
    pub kind: TxKind,
    pub hash: Hash32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ApplyOutcome {
    Applied,
    /// Accepted in place of a conflicting transaction with a larger key.
    Superseded { replaced: Hash32 },
    Rejected(RejectReason),
}

impl ApplyOutcome {
    pub fn is_accepted(&self) -> bool {
        !matches!(self, ApplyOutcome::Rejected(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Ballot {
    ciphertext: Ciphertext,
    key: RecordKey,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Share {
    partial: PartialDecryption,
    key: RecordKey,
}

/// One replica of the election bulletin board.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LedgerState {
    config: Option<ElectionConfig>,
    phase: Phase,
    commitments: BTreeMap<Hash32, RecordKey>,
    frozen: Option<MerkleTree>,
    ballots: BTreeMap<Hash32, Ballot>,
    tally_sum: Option<Ciphertext>,
    shares: BTreeMap<u16, Share>,
    records: BTreeMap<RecordKey, Transaction>,
}

fn required_phase(kind: TxKind) -> Phase {
    match kind {
        TxKind::Config => Phase::Setup,
        TxKind::Registration => Phase::Registration,
        TxKind::Vote => Phase::Voting,
        TxKind::TallyShare => Phase::Tally,
    }
}

impl LedgerState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn config(&self) -> Option<&ElectionConfig> {
        self.config.as_ref()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn commitments(&self) -> impl Iterator<Item = &Hash32> {
        self.commitments.keys()
    }

    pub fn commitment_count(&self) -> usize {
        self.commitments.len()
    }

    pub fn frozen_root(&self) -> Option<Hash32> {
        self.frozen.as_ref().map(MerkleTree::root)
    }

    pub fn frozen_tree(&self) -> Option<&MerkleTree> {
        self.frozen.as_ref()
    }

    pub fn vote_nullifiers(&self) -> impl Iterator<Item = &Hash32> {
        self.ballots.keys()
    }

    pub fn has_nullifier(&self, nf: &Hash32) -> bool {
        self.ballots.contains_key(nf)
    }

    /// Ballots in nullifier order.
    pub fn ballot_box(&self) -> impl Iterator<Item = &Ciphertext> {
        self.ballots.values().map(|b| &b.ciphertext)
    }

    pub fn ballot_count(&self) -> usize {
        self.ballots.len()
    }

    pub fn shares(&self) -> impl Iterator<Item = &PartialDecryption> {
        self.shares.values().map(|s| &s.partial)
    }

    pub fn share_count(&self) -> usize {
        self.shares.len()
    }

    /// Accepted transactions in canonical `(tick, kind, hash)` order.
    pub fn records(&self) -> impl Iterator<Item = (&RecordKey, &Transaction)> {
        self.records.iter()
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    pub fn contains(&self, key: &RecordKey) -> bool {
        self.records.contains_key(key)
    }

    /// Move the phase forward to the one in force at `tick`. Entering Voting
    /// freezes the commitment tree; entering Tally fixes the ballot sum.
    pub fn advance_phase(&mut self, tick: u64) -> Phase {
        let Some(cfg) = &self.config else {
            return self.phase;
        };
        let target = cfg.schedule.phase_at(tick);
        if target > self.phase {
            if self.phase < Phase::Voting && target >= Phase::Voting {
                self.frozen = Some(MerkleTree::new(self.commitments.keys().copied().collect()));
            }
            if self.phase < Phase::Tally && target >= Phase::Tally {
                self.tally_sum = sum(&cfg.pk, self.ballots.values().map(|b| &b.ciphertext));
            }
            self.phase = target;
        }
        self.phase
    }

    /// Validate and apply a transaction that originated at `tick`. The caller
    /// advances the phase to its own clock first; rejected transactions leave
    /// the state untouched.
    pub fn apply(&mut self, tx: &Transaction, tick: u64) -> ApplyOutcome {
        match self.try_apply(tx, tick) {
            Ok(outcome) => outcome,
            Err(reason) => ApplyOutcome::Rejected(reason),
        }
    }

    fn try_apply(&mut self, tx: &Transaction, tick: u64) -> Result<ApplyOutcome, RejectReason> {
        let key = RecordKey {
            tick,
            kind: tx.kind(),
            hash: tx.hash(),
        };
        if let Transaction::Config(cfg) = tx {
            if self.config.is_some() {
                return Err(RejectReason::ConfigAlreadySet);
            }
            cfg.validate()
                .map_err(|e| RejectReason::InvalidConfig(e.to_string()))?;
            if tick >= cfg.schedule.registration_close {
                return Err(RejectReason::WrongPhase);
            }
            self.config = Some((**cfg).clone());
            self.phase = Phase::Registration;
            self.records.insert(key, tx.clone());
            return Ok(ApplyOutcome::Applied);
        }

        let cfg = self.config.as_ref().ok_or(RejectReason::UnknownElection)?;
        if tx.election_id() != cfg.election_id() {
            return Err(RejectReason::UnknownElection);
        }
        let required = required_phase(key.kind);
        if cfg.schedule.phase_at(tick) != required || self.phase < required {
            return Err(RejectReason::WrongPhase);
        }
        if self.phase > required {
            return Err(RejectReason::LateArrival);
        }

        match tx {
            Transaction::Config(_) => unreachable!(),
            Transaction::Registration {
                commitment,
                presentation,
            } => {
                let cm = verify_presentation(presentation, &cfg.registrar_pk, cfg.election_id())
                    .map_err(|e| RejectReason::InvalidProof(e.to_string()))?;
                if cm != *commitment {
                    return Err(RejectReason::CommitmentMismatch);
                }
                if self.commitments.contains_key(commitment) {
                    return Err(RejectReason::DuplicateCommitment);
                }
                self.commitments.insert(*commitment, key);
                self.records.insert(key, tx.clone());
                Ok(ApplyOutcome::Applied)
            }
            Transaction::Vote {
                ciphertext,
                nullifier,
                proof,
                ..
            } => {
                let held = self.ballots.get(nullifier).map(|b| b.key);
                if held.is_some_and(|h| h <= key) {
                    return Err(RejectReason::DuplicateNullifier);
                }
                if !cfg.pk.is_unit_mod_n2(ciphertext.value()) {
                    return Err(RejectReason::InvalidProof("ciphertext out of range".into()));
                }
                let root = self.frozen_root().expect("frozen on entering Voting");
                let stmt = VoteStatement {
                    election_id: *cfg.election_id(),
                    merkle_root: root,
                    nullifier: *nullifier,
                    ciphertext,
                    pk: &cfg.pk,
                };
                verify_vote(cfg.vote_backend, &stmt, proof)
                    .map_err(|e| RejectReason::InvalidProof(e.to_string()))?;
                self.ballots.insert(
                    *nullifier,
                    Ballot {
                        ciphertext: ciphertext.clone(),
                        key,
                    },
                );
                self.records.insert(key, tx.clone());
                Ok(self.displace(held))
            }
            Transaction::TallyShare { partial, proof, .. } => {
                let held = self.shares.get(&partial.index).map(|s| s.key);
                if held.is_some_and(|h| h <= key) {
                    return Err(RejectReason::DuplicateShareIndex);
                }
                let c_sum = self.tally_sum.as_ref().ok_or(RejectReason::EmptyBallotBox)?;
                let proof = ShareCorrectnessProof::from_bytes(&cfg.pk, &cfg.params, proof)
                    .map_err(|e| RejectReason::InvalidProof(format!("share proof: {e}")))?;
                verify_share(&cfg.pk, &cfg.params, partial.index, c_sum, partial, &proof)
                    .map_err(|e| RejectReason::InvalidProof(e.to_string()))?;
                self.shares.insert(
                    partial.index,
                    Share {
                        partial: partial.clone(),
                        key,
                    },
                );
                self.records.insert(key, tx.clone());
                Ok(self.displace(held))
            }
        }
    }

    fn displace(&mut self, held: Option<RecordKey>) -> ApplyOutcome {
        match held {
            Some(old) => {
                self.records.remove(&old);
                ApplyOutcome::Superseded { replaced: old.hash }
            }
            None => ApplyOutcome::Applied,
        }
    }

    /// Homomorphic sum of the ballot box.
    pub fn compute_sum(&self) -> Result<Ciphertext, LedgerError> {
        if let Some(s) = &self.tally_sum {
            return Ok(s.clone());
        }
        let cfg = self.config.as_ref().ok_or(LedgerError::NoConfig)?;
        sum(&cfg.pk, self.ballot_box()).ok_or(LedgerError::EmptyBallotBox)
    }

    /// Combine the lowest-indexed `t` verified shares.
    pub fn finalize_tally(&self) -> Result<TallyResult, LedgerError> {
        let cfg = self.config.as_ref().ok_or(LedgerError::NoConfig)?;
        if self.phase < Phase::Tally {
            return Err(LedgerError::WrongPhase);
        }
        let partials: Vec<PartialDecryption> = self.shares().cloned().collect();
        let yes = combine(&cfg.pk, &cfg.params, &partials).map_err(|e| match e {
            HeError::InsufficientShares { needed, got } => {
                LedgerError::InsufficientShares { needed, got }
            }
            _ => LedgerError::CombinationFailure,
        })?;
        let total = self.ballots.len() as u64;
        let yes = yes.to_u64().filter(|&y| y <= total).ok_or(LedgerError::InconsistentTally)?;
        Ok(TallyResult {
            yes_count: yes,
            no_count: total - yes,
            total_votes: total,
        })
    }

    /// Canonical encoding: phase, frozen root, and every accepted record.
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(self.phase as u8);
        match self.frozen_root() {
            Some(root) => w.u8(1).fixed(&root),
            None => w.u8(0),
        };
        self.write_records(&mut w);
        w.finish()
    }

    fn write_records(&self, w: &mut Writer) {
        w.u32(self.records.len() as u32);
        for (key, tx) in &self.records {
            w.u64(key.tick);
            let mut body = Writer::new();
            tx.write(&mut body);
            w.var(&body.finish());
        }
    }

    /// Digest of the replicated content: the frozen root and every record
    /// key (the key carries the transaction hash). The phase is excluded
    /// since replicas advance their clocks independently.
    pub fn state_hash(&self) -> Hash32 {
        let mut w = Writer::new();
        match self.frozen_root() {
            Some(root) => w.u8(1).fixed(&root),
            None => w.u8(0),
        };
        w.u32(self.records.len() as u32);
        for key in self.records.keys() {
            w.u64(key.tick).u8(key.kind as u8).fixed(&key.hash);
        }
        hash::tagged(tag::LEDGER_STATE, &[&w.finish()])
    }
}
