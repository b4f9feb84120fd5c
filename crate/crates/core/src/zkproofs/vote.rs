//! The vote statement, its constraint checker, and pluggable proof backends.
//!
//! The transparent backend ships the witness in the clear next to an
//! encryption-validity proof. It proves nothing in zero knowledge and exists
//! so that every other layer can be exercised end to end.

use std::fmt;
use std::sync::{Arc, RwLock};

use rand::RngCore;
use rug::Integer;

use super::enc_validity::{prove_enc_validity, verify_enc_validity, EncValidityProof};
use super::ProofError;
use crate::bigint;
use crate::codec::{CodecError, Reader, Writer};
use crate::hash::{self, Hash32};
use crate::hebackend::{raw_encrypt, Ciphertext, PaillierPublicKey};
use crate::ledger::merkle::{fold_path, PathStep};

/// Public inputs of a vote proof.
#[derive(Clone, Copy, Debug)]
pub struct VoteStatement<'a> {
    pub election_id: Hash32,
    pub merkle_root: Hash32,
    pub nullifier: Hash32,
    pub ciphertext: &'a Ciphertext,
    pub pk: &'a PaillierPublicKey,
}

impl VoteStatement<'_> {
    /// Frozen serialization shared by every backend.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.fixed(&self.election_id)
            .fixed(&self.merkle_root)
            .fixed(&self.nullifier)
            .fixed(&self.pk.to_bytes())
            .fixed(&self.ciphertext.to_bytes(self.pk));
        w.finish()
    }

    /// Context bound into the embedded encryption proof.
    pub fn digest(&self) -> Hash32 {
        hash::tagged(hash::tag::VOTE_STATEMENT, &[&self.to_bytes()])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoteWitness {
    pub secret_id: [u8; 32],
    pub choice: u64,
    pub randomizer: Integer,
    pub merkle_path: Vec<PathStep>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintId {
    /// Commitment of the secret is a leaf under the statement root.
    Membership,
    /// Nullifier derives from the secret and election id.
    Nullifier,
    /// Ciphertext encrypts the choice under the randomizer, choice is 0 or 1.
    Encryption,
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintId::Membership => "C1 (membership)",
            ConstraintId::Nullifier => "C2 (nullifier)",
            ConstraintId::Encryption => "C3 (encryption)",
        })
    }
}

/// Evaluate the constraints in order and report the first one violated.
pub fn check_witness(stmt: &VoteStatement<'_>, w: &VoteWitness) -> Result<(), ConstraintId> {
    let cm = hash::commitment(&w.secret_id);
    if fold_path(&cm, &w.merkle_path) != stmt.merkle_root {
        return Err(ConstraintId::Membership);
    }
    if hash::vote_nullifier(&w.secret_id, &stmt.election_id) != stmt.nullifier {
        return Err(ConstraintId::Nullifier);
    }
    let pk = stmt.pk;
    if w.choice > 1 || w.randomizer <= 0 || w.randomizer >= *pk.n() {
        return Err(ConstraintId::Encryption);
    }
    if raw_encrypt(pk, &Integer::from(w.choice), &w.randomizer) != *stmt.ciphertext.value() {
        return Err(ConstraintId::Encryption);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BackendId {
    Transparent,
    Snark,
}

impl BackendId {
    pub fn to_byte(self) -> u8 {
        match self {
            BackendId::Transparent => 0,
            BackendId::Snark => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(BackendId::Transparent),
            1 => Some(BackendId::Snark),
            _ => None,
        }
    }
}

impl fmt::Display for BackendId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendId::Transparent => "transparent",
            BackendId::Snark => "snark",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoteProof {
    pub backend: BackendId,
    pub payload: Vec<u8>,
}

impl VoteProof {
    pub fn write(&self, w: &mut Writer) {
        w.u8(self.backend.to_byte()).var(&self.payload);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let backend =
            BackendId::from_byte(r.u8()?).ok_or(CodecError::Invalid("vote proof backend"))?;
        let payload = r.var()?.to_vec();
        Ok(Self { backend, payload })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let proof = Self::read(&mut r)?;
        r.finish()?;
        Ok(proof)
    }
}

/// An externally supplied succinct proof system for the vote statement.
pub trait SnarkBackend: Send + Sync {
    fn prove(&self, stmt: &VoteStatement<'_>, w: &VoteWitness) -> Result<Vec<u8>, ProofError>;
    fn verify(&self, stmt: &VoteStatement<'_>, payload: &[u8]) -> Result<(), ProofError>;
}

static SNARK: RwLock<Option<Arc<dyn SnarkBackend>>> = RwLock::new(None);

/// Install the process-wide succinct backend, replacing any previous one.
pub fn register_snark_backend(backend: Arc<dyn SnarkBackend>) {
    *SNARK.write().unwrap_or_else(|e| e.into_inner()) = Some(backend);
}

fn snark() -> Result<Arc<dyn SnarkBackend>, ProofError> {
    SNARK
        .read()
        .unwrap_or_else(|e| e.into_inner())
        .clone()
        .ok_or(ProofError::BackendUnavailable(BackendId::Snark))
}

pub fn prove_vote<R: RngCore + ?Sized>(
    backend: BackendId,
    stmt: &VoteStatement<'_>,
    w: &VoteWitness,
    rng: &mut R,
) -> Result<VoteProof, ProofError> {
    let payload = match backend {
        BackendId::Transparent => {
            check_witness(stmt, w).map_err(ProofError::ConstraintViolated)?;
            let enc = prove_enc_validity(
                stmt.pk,
                stmt.ciphertext,
                w.choice,
                &w.randomizer,
                &stmt.digest(),
                rng,
            )?;
            encode_transparent(stmt.pk, w, &enc)
        }
        BackendId::Snark => snark()?.prove(stmt, w)?,
    };
    Ok(VoteProof { backend, payload })
}

pub fn verify_vote(
    backend: BackendId,
    stmt: &VoteStatement<'_>,
    proof: &VoteProof,
) -> Result<(), ProofError> {
    if proof.backend != backend {
        return Err(ProofError::WrongBackend {
            expected: backend,
            found: proof.backend,
        });
    }
    match backend {
        BackendId::Transparent => {
            let (w, enc) = decode_transparent(stmt.pk, &proof.payload)
                .map_err(|e| ProofError::MalformedPayload(e.to_string()))?;
            check_witness(stmt, &w).map_err(ProofError::ConstraintViolated)?;
            verify_enc_validity(stmt.pk, stmt.ciphertext, &enc, &stmt.digest())
        }
        BackendId::Snark => snark()?.verify(stmt, &proof.payload),
    }
}

/// Transparent-backend payload: the witness in the clear followed by the
/// embedded encryption-validity proof.
pub fn encode_transparent(pk: &PaillierPublicKey, w: &VoteWitness, enc: &EncValidityProof) -> Vec<u8> {
    let mut out = Writer::new();
    out.fixed(&w.secret_id)
        .u64(w.choice)
        .fixed(&bigint::to_fixed(&w.randomizer, pk.modulus_bytes()))
        .u16(w.merkle_path.len() as u16);
    for step in &w.merkle_path {
        out.fixed(&step.sibling).u8(step.sibling_on_left as u8);
    }
    out.var(&enc.to_bytes(pk));
    out.finish()
}

pub fn decode_transparent(
    pk: &PaillierPublicKey,
    payload: &[u8],
) -> Result<(VoteWitness, EncValidityProof), CodecError> {
    let mut r = Reader::new(payload);
    let secret_id = r.array::<32>()?;
    let choice = r.u64()?;
    let randomizer = bigint::read_fixed(&mut r, pk.modulus_bytes())?;
    let depth = r.u16()?;
    let mut merkle_path = Vec::with_capacity(depth.min(64) as usize);
    for _ in 0..depth {
        let sibling = r.array::<32>()?;
        let sibling_on_left = match r.u8()? {
            0 => false,
            1 => true,
            _ => return Err(CodecError::Invalid("merkle side flag")),
        };
        merkle_path.push(PathStep {
            sibling,
            sibling_on_left,
        });
    }
    let enc = EncValidityProof::from_bytes(pk, r.var()?)?;
    r.finish()?;
    Ok((
        VoteWitness {
            secret_id,
            choice,
            randomizer,
            merkle_path,
        },
        enc,
    ))
}
