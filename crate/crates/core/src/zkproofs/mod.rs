//! Non-interactive sigma protocols and the vote statement.

mod enc_validity;
mod share;
mod transcript;
mod vote;

use thiserror::Error;

pub use enc_validity::{prove_enc_validity, verify_enc_validity, EncValidityProof};
pub use share::{prove_share, verify_share, ShareCorrectnessProof};
pub use transcript::{Transcript, CHALLENGE_BITS};
pub use vote::{
    check_witness, decode_transparent, encode_transparent, prove_vote, register_snark_backend, verify_vote, BackendId, ConstraintId,
    SnarkBackend, VoteProof, VoteStatement, VoteWitness,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("witness does not match the statement")]
    WitnessMismatch,
    #[error("{0} out of range")]
    OutOfRange(&'static str),
    #[error("challenge does not match transcript")]
    ChallengeMismatch,
    #[error("verification equation failed: {0}")]
    EquationFailed(&'static str),
    #[error("share index does not match partial decryption")]
    IndexMismatch,
    #[error("unknown share index {0}")]
    UnknownShareIndex(u16),
    #[error("constraint {0} violated")]
    ConstraintViolated(ConstraintId),
    #[error("malformed proof payload: {0}")]
    MalformedPayload(String),
    #[error("proof backend {0} unavailable")]
    BackendUnavailable(BackendId),
    #[error("proof names backend {found}, election expects {expected}")]
    WrongBackend { expected: BackendId, found: BackendId },
}
