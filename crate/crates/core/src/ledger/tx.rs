use rug::Integer;

use super::config::ElectionConfig;
use crate::bigint;
use crate::codec::{CodecError, Reader, Writer};
use crate::credentials::Presentation;
use crate::hash::{self, tag, Hash32};
use crate::hebackend::{Ciphertext, PartialDecryption};
use crate::zkproofs::VoteProof;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Transaction {
    Config(Box<ElectionConfig>),
    Registration {
        commitment: Hash32,
        presentation: Presentation,
    },
    Vote {
        election_id: Hash32,
        ciphertext: Ciphertext,
        nullifier: Hash32,
        proof: VoteProof,
    },
    /// The share index travels inside the partial decryption.
    TallyShare {
        election_id: Hash32,
        partial: PartialDecryption,
        /// Fixed-width share-proof encoding, parsed against the election key.
        proof: Vec<u8>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TxKind {
    Config = 0,
    Registration = 1,
    Vote = 2,
    TallyShare = 3,
}

impl TxKind {
    pub fn name(self) -> &'static str {
        match self {
            TxKind::Config => "config",
            TxKind::Registration => "registration",
            TxKind::Vote => "vote",
            TxKind::TallyShare => "tally-share",
        }
    }
}

impl Transaction {
    pub fn kind(&self) -> TxKind {
        match self {
            Transaction::Config(_) => TxKind::Config,
            Transaction::Registration { .. } => TxKind::Registration,
            Transaction::Vote { .. } => TxKind::Vote,
            Transaction::TallyShare { .. } => TxKind::TallyShare,
        }
    }

    pub fn write(&self, w: &mut Writer) {
        w.u8(self.kind() as u8);
        match self {
            Transaction::Config(cfg) => cfg.write(w),
            Transaction::Registration {
                commitment,
                presentation,
            } => {
                w.fixed(commitment);
                presentation.write(w);
            }
            Transaction::Vote {
                election_id,
                ciphertext,
                nullifier,
                proof,
            } => {
                w.fixed(election_id);
                bigint::write_minimal(w, ciphertext.value());
                w.fixed(nullifier);
                proof.write(w);
            }
            Transaction::TallyShare {
                election_id,
                partial,
                proof,
            } => {
                w.fixed(election_id).u16(partial.index);
                bigint::write_minimal(w, &partial.sigma);
                w.var(proof);
            }
        }
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(match r.u8()? {
            0 => Transaction::Config(Box::new(ElectionConfig::read(r)?)),
            1 => Transaction::Registration {
                commitment: r.array()?,
                presentation: Presentation::read(r)?,
            },
            2 => Transaction::Vote {
                election_id: r.array()?,
                ciphertext: Ciphertext::from_value(bigint::read_minimal(r)?),
                nullifier: r.array()?,
                proof: VoteProof::read(r)?,
            },
            3 => {
                let election_id = r.array()?;
                let index = r.u16()?;
                let sigma: Integer = bigint::read_minimal(r)?;
                Transaction::TallyShare {
                    election_id,
                    partial: PartialDecryption { index, sigma },
                    proof: r.var()?.to_vec(),
                }
            }
            _ => return Err(CodecError::Invalid("transaction kind")),
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let tx = Self::read(&mut r)?;
        r.finish()?;
        Ok(tx)
    }

    /// Gossip identifier and conflict-resolution tiebreaker.
    pub fn hash(&self) -> Hash32 {
        hash::tagged(tag::TRANSACTION, &[&self.to_bytes()])
    }

    /// Election the transaction claims to belong to.
    pub fn election_id(&self) -> &Hash32 {
        match self {
            Transaction::Config(cfg) => cfg.election_id(),
            Transaction::Registration { presentation, .. } => &presentation.election_id,
            Transaction::Vote { election_id, .. } | Transaction::TallyShare { election_id, .. } => {
                election_id
            }
        }
    }
}
