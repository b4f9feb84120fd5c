//! Binary and text ledger exports.
//!
//! Binary layout: magic, version byte, `u32` record count, records of
//! `u64 tick ‖ var(tx)`, a claim flag with optional claim, and a 32-byte
//! digest over everything before it.

use std::fmt::Write as _;

use rug::Integer;
use thiserror::Error;

use super::state::LedgerState;
use super::tx::Transaction;
use super::TallyResult;
use crate::bigint;
use crate::codec::{CodecError, Reader, Writer};
use crate::hash::{self, tag, Hash32};

pub const DUMP_MAGIC: &[u8; 8] = b"SDVLEDGR";
pub const DUMP_VERSION: u8 = 1;

/// Result published by the exporting peer, checked by the auditor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claim {
    pub tally: TallyResult,
    pub ballot_sum: Integer,
    pub merkle_root: Hash32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LedgerDump {
    pub records: Vec<(u64, Transaction)>,
    pub claim: Option<Claim>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodedDump {
    pub dump: LedgerDump,
    /// Whether the trailing digest matched.
    pub integrity_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DumpError {
    #[error("not a ledger dump")]
    BadMagic,
    #[error("unsupported dump version {0}")]
    UnsupportedVersion(u8),
    #[error("corrupt dump: {0}")]
    Corrupt(#[from] CodecError),
}

impl LedgerDump {
    /// Export a replica with an optional published result.
    pub fn from_state(state: &LedgerState, tally: Option<TallyResult>) -> Self {
        let records = state
            .records()
            .map(|(key, tx)| (key.tick, tx.clone()))
            .collect();
        let claim = tally.and_then(|tally| {
            Some(Claim {
                tally,
                ballot_sum: state.compute_sum().ok()?.value().clone(),
                merkle_root: state.frozen_root()?,
            })
        });
        Self { records, claim }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.fixed(DUMP_MAGIC).u8(DUMP_VERSION).u32(self.records.len() as u32);
        for (tick, tx) in &self.records {
            w.u64(*tick).var(&tx.to_bytes());
        }
        match &self.claim {
            None => {
                w.u8(0);
            }
            Some(c) => {
                w.u8(1)
                    .u64(c.tally.yes_count)
                    .u64(c.tally.no_count)
                    .u64(c.tally.total_votes);
                bigint::write_minimal(&mut w, &c.ballot_sum);
                w.fixed(&c.merkle_root);
            }
        }
        let mut body = w.finish();
        let digest = hash::tagged(tag::DUMP, &[&body]);
        body.extend_from_slice(&digest);
        body
    }

    pub fn decode(bytes: &[u8]) -> Result<DecodedDump, DumpError> {
        if bytes.len() < DUMP_MAGIC.len() || &bytes[..DUMP_MAGIC.len()] != DUMP_MAGIC {
            return Err(DumpError::BadMagic);
        }
        let mut r = Reader::new(bytes);
        r.fixed(DUMP_MAGIC.len())?;
        let version = r.u8()?;
        if version != DUMP_VERSION {
            return Err(DumpError::UnsupportedVersion(version));
        }
        let count = r.u32()?;
        let mut records = Vec::with_capacity(count.min(1 << 16) as usize);
        for _ in 0..count {
            let tick = r.u64()?;
            records.push((tick, Transaction::from_bytes(r.var()?)?));
        }
        let claim = match r.u8()? {
            0 => None,
            1 => Some(Claim {
                tally: TallyResult {
                    yes_count: r.u64()?,
                    no_count: r.u64()?,
                    total_votes: r.u64()?,
                },
                ballot_sum: bigint::read_minimal(&mut r)?,
                merkle_root: r.array()?,
            }),
            _ => return Err(CodecError::Invalid("claim flag").into()),
        };
        let body_len = r.position();
        let digest = r.array::<32>()?;
        r.finish()?;
        Ok(DecodedDump {
            dump: LedgerDump { records, claim },
            integrity_ok: hash::tagged(tag::DUMP, &[&bytes[..body_len]]) == digest,
        })
    }

    /// One line per record, hex fields, for diffing.
    pub fn to_text(&self) -> String {
        let mut out = format!("sdvote-ledger v{DUMP_VERSION} records={}\n", self.records.len());
        for (tick, tx) in &self.records {
            let _ = writeln!(
                out,
                "{tick} {} {} {}",
                tx.kind().name(),
                hex::encode(tx.hash()),
                hex::encode(tx.to_bytes())
            );
        }
        if let Some(c) = &self.claim {
            let _ = writeln!(
                out,
                "claim yes={} no={} total={} root={} sum={}",
                c.tally.yes_count,
                c.tally.no_count,
                c.tally.total_votes,
                hex::encode(c.merkle_root),
                hex::encode(bigint::to_minimal(&c.ballot_sum))
            );
        }
        out
    }
}
