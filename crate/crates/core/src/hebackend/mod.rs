//! Threshold additively homomorphic Paillier encryption.
//!
//! Plain Paillier (`s = 1`) with `g = n + 1`, a trusted dealer, and
//! Shoup-style integer Lagrange combination scaled by `Δ = N!`.

mod cipher;
mod keys;
mod primes;
mod threshold;

use thiserror::Error;

pub use cipher::{add, decrypt_direct, encrypt, encrypt_with, sum, Ciphertext};
pub(crate) use cipher::raw_encrypt;
pub use keys::{
    factorial, keygen, keygen_from_primes, FullSecretKey, KeyShare, PaillierPublicKey,
    ThresholdKeys, ThresholdParams, MAX_SHARES, MIN_TOY_BITS, SAFE_PRIME_THRESHOLD,
};
pub use threshold::{combine, lagrange_at_zero, partial_decrypt, PartialDecryption};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeError {
    #[error("invalid threshold t={t} for N={big_n}")]
    InvalidThreshold { t: u16, big_n: u16 },
    #[error("unsupported modulus size {0} bits")]
    InvalidKeySize(u32),
    #[error("invalid modulus")]
    InvalidModulus,
    #[error("prime generation failed")]
    PrimeGenerationFailure,
    #[error("plaintext out of range")]
    PlaintextOutOfRange,
    #[error("randomizer not a unit mod n")]
    BadRandomizer,
    #[error("need {needed} shares, got {got}")]
    InsufficientShares { needed: u16, got: usize },
    #[error("duplicate share index {0}")]
    DuplicateShareIndex(u16),
    #[error("unknown share index {0}")]
    UnknownShareIndex(u16),
    #[error("share combination failed")]
    CombinationFailure,
}
