//! Every single-bit mutation of a valid proof is rejected, and valid proofs
//! do not transfer to other public inputs.

mod common;

use common::Artifacts;
use rug::Integer;
use sdvote::credentials::{verify_presentation, Presentation};
use sdvote::hebackend::{encrypt_with, partial_decrypt};
use sdvote::zkproofs::{
    verify_enc_validity, verify_share, verify_vote, BackendId, EncValidityProof, ShareCorrectnessProof,
    VoteProof, VoteStatement,
};

fn flips(bytes: &[u8]) -> impl Iterator<Item = Vec<u8>> + '_ {
    (0..bytes.len() * 8).map(move |bit| {
        let mut m = bytes.to_vec();
        m[bit / 8] ^= 1 << (bit % 8);
        m
    })
}

#[test]
fn enc_validity_bit_flips() {
    let a = Artifacts::build();
    let pk = &a.keys.pk;
    verify_enc_validity(pk, &a.enc_ciphertext, &a.enc_proof, &a.enc_context).unwrap();
    let bytes = a.enc_proof.to_bytes(pk);
    let mut tried = 0;
    for m in flips(&bytes) {
        tried += 1;
        if let Ok(p) = EncValidityProof::from_bytes(pk, &m) {
            assert!(verify_enc_validity(pk, &a.enc_ciphertext, &p, &a.enc_context).is_err());
        }
    }
    assert_eq!(tried, bytes.len() * 8);
}

#[test]
fn share_proof_bit_flips() {
    let a = Artifacts::build();
    let (pk, params) = (&a.keys.pk, &a.keys.params);
    let sigma = &a.partial;
    verify_share(pk, params, a.partial.index, &a.c_sum, sigma, &a.share_proof).unwrap();
    for m in flips(&a.share_proof.to_bytes(pk, params)) {
        if let Ok(p) = ShareCorrectnessProof::from_bytes(pk, params, &m) {
            assert!(verify_share(pk, params, a.partial.index, &a.c_sum, sigma, &p).is_err());
        }
    }
}

#[test]
fn presentation_bit_flips() {
    let a = Artifacts::build();
    let rpk = a.registrar.verifying_key();
    let eid = a.config.election_id();
    assert_eq!(verify_presentation(&a.presentation, &rpk, eid).unwrap(), a.credential.commitment());
    for m in flips(&a.presentation.to_bytes()) {
        if let Ok(p) = Presentation::from_bytes(&m) {
            assert!(verify_presentation(&p, &rpk, eid).is_err());
        }
    }
}

#[test]
fn vote_proof_bit_flips() {
    let a = Artifacts::build();
    let stmt = a.vote_statement();
    verify_vote(BackendId::Transparent, &stmt, &a.vote_proof).unwrap();
    for m in flips(&a.vote_proof.to_bytes()) {
        if let Ok(p) = VoteProof::from_bytes(&m) {
            assert!(verify_vote(BackendId::Transparent, &stmt, &p).is_err());
        }
    }
}

#[test]
fn enc_proof_does_not_transplant() {
    let a = Artifacts::build();
    let pk = &a.keys.pk;
    // Same plaintext, different randomizer.
    let other = encrypt_with(pk, &Integer::from(1), &Integer::from(99u32)).unwrap();
    assert!(verify_enc_validity(pk, &other, &a.enc_proof, &a.enc_context).is_err());
    assert!(verify_enc_validity(pk, &a.enc_ciphertext, &a.enc_proof, b"other context").is_err());
}

#[test]
fn share_proof_does_not_transplant() {
    let a = Artifacts::build();
    let (pk, params) = (&a.keys.pk, &a.keys.params);
    let other_sum = encrypt_with(pk, &Integer::from(6), &Integer::from(78u32)).unwrap();
    let other_sigma = partial_decrypt(pk, &a.keys.shares[1], params, &other_sum);
    assert!(verify_share(pk, params, a.partial.index, &other_sum, &other_sigma, &a.share_proof).is_err());
    assert!(verify_share(pk, params, a.partial.index, &a.c_sum, &other_sigma, &a.share_proof).is_err());
    // Claiming another participant's slot.
    for index in [1, 3] {
        let mut relabeled = a.partial.clone();
        relabeled.index = index;
        assert!(verify_share(pk, params, index, &a.c_sum, &relabeled, &a.share_proof).is_err());
    }
}

#[test]
fn presentation_does_not_transplant() {
    let a = Artifacts::build();
    let rpk = a.registrar.verifying_key();
    assert!(verify_presentation(&a.presentation, &rpk, &[0u8; 32]).is_err());
    let mut swapped = a.presentation.clone();
    swapped.commitments[0] = [0x42; 32];
    assert!(verify_presentation(&swapped, &rpk, a.config.election_id()).is_err());
}

#[test]
fn vote_proof_does_not_transplant() {
    let a = Artifacts::build();
    let base = a.vote_statement();
    let other_c = encrypt_with(&a.keys.pk, &Integer::from(0), &Integer::from(5u32)).unwrap();
    let variants = [
        VoteStatement { election_id: [9; 32], ..base },
        VoteStatement { merkle_root: [9; 32], ..base },
        VoteStatement { nullifier: [9; 32], ..base },
        VoteStatement { ciphertext: &other_c, ..base },
    ];
    for stmt in &variants {
        assert!(verify_vote(BackendId::Transparent, stmt, &a.vote_proof).is_err());
    }
    assert!(verify_vote(BackendId::Snark, &base, &a.vote_proof).is_err());
}
