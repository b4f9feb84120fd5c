//! SHA-256 with one-byte domain tags.
//!
//! Every protocol-level digest is `SHA-256(tag ‖ parts…)`; the tags keep the
//! commitment, nullifier, Merkle and attribute contexts from colliding.

use sha2::{Digest, Sha256};

pub type Hash32 = [u8; 32];

/// Domain tags used throughout the protocol.
pub mod tag {
    /// Voter commitment `cm = H(0x01 ‖ secret_id)`.
    pub const COMMITMENT: u8 = 0x01;
    /// Vote nullifier `nf = H(0x02 ‖ secret_id ‖ election_id)`.
    pub const NULLIFIER: u8 = 0x02;
    pub const MERKLE_LEAF: u8 = 0x03;
    pub const MERKLE_NODE: u8 = 0x04;
    /// Salted credential attribute commitments.
    pub const ATTRIBUTE: u8 = 0x05;
    /// Registrar-side nullifier `v_nf = H(0x06 ‖ pid ‖ election_id)`.
    pub const REGISTRAR_NULLIFIER: u8 = 0x06;
    /// Election identifier derived from the configuration body.
    pub const ELECTION_ID: u8 = 0x07;
    /// Transaction identifiers used by gossip and conflict resolution.
    pub const TRANSACTION: u8 = 0x08;
    /// Ledger state digests.
    pub const LEDGER_STATE: u8 = 0x09;
    /// Ledger dump trailer digest.
    pub const DUMP: u8 = 0x0a;
    /// Vote statement digest bound into vote proofs.
    pub const VOTE_STATEMENT: u8 = 0x0b;
}

/// `SHA-256(tag ‖ parts[0] ‖ parts[1] ‖ …)`.
pub fn tagged(tag: u8, parts: &[&[u8]]) -> Hash32 {
    let mut hasher = Sha256::new();
    hasher.update([tag]);
    for part in parts {
        hasher.update(part);
    }
    hasher.finalize().into()
}

/// Voter commitment over a registrar-issued secret.
pub fn commitment(secret_id: &[u8; 32]) -> Hash32 {
    tagged(tag::COMMITMENT, &[secret_id])
}

/// Vote nullifier, unique per (secret, election).
pub fn vote_nullifier(secret_id: &[u8; 32], election_id: &[u8; 32]) -> Hash32 {
    tagged(tag::NULLIFIER, &[secret_id, election_id])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_separate_contexts() {
        let secret = [7u8; 32];
        let election = [9u8; 32];
        assert_ne!(commitment(&secret), tagged(tag::NULLIFIER, &[&secret]));
        assert_ne!(vote_nullifier(&secret, &election), vote_nullifier(&secret, &[8u8; 32]));
    }

    #[test]
    fn matches_plain_sha256() {
        let expected: Hash32 = Sha256::digest([0x01u8, 0xaa, 0xbb]).into();
        assert_eq!(tagged(0x01, &[&[0xaa], &[0xbb]]), expected);
    }
}
