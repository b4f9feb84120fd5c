//! Chaum–Pedersen proof that a partial decryption used the dealt share.
//!
//! Proves `log_v(v_i) = log_{c⁴}(σ_i²)` with witness `Δ·s_i`, where
//! `v_i = v^{Δ·s_i}` and `σ_i = c^{2·Δ·s_i}`. Responses are computed over the
//! integers (the group order is secret), so the nonce is padded by two
//! challenge widths for statistical hiding.

use rand::RngCore;
use rug::Integer;

use super::transcript::{Transcript, CHALLENGE_BITS};
use super::ProofError;
use crate::bigint;
use crate::codec::{CodecError, Reader, Writer};
use crate::hebackend::{
    partial_decrypt, Ciphertext, KeyShare, PaillierPublicKey, PartialDecryption, ThresholdParams,
};

const DOMAIN: &[u8] = b"sdvote/share-correctness/v1";
const CHALLENGE_BYTES: usize = (CHALLENGE_BITS / 8) as usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareCorrectnessProof {
    /// `v^ρ`
    pub base_commitment: Integer,
    /// `(c⁴)^ρ`
    pub cipher_commitment: Integer,
    pub challenge: Integer,
    pub response: Integer,
}

fn nonce_bits(pk: &PaillierPublicKey, params: &ThresholdParams) -> u32 {
    // Δ·s_i < Δ·n·λ < Δ·n²
    2 * pk.bits() + params.delta.significant_bits() + 2 * CHALLENGE_BITS
}

fn response_bytes(pk: &PaillierPublicKey, params: &ThresholdParams) -> usize {
    bigint::byte_len(nonce_bits(pk, params) + 1)
}

fn cipher_base(pk: &PaillierPublicKey, c: &Ciphertext) -> Integer {
    bigint::pow_mod(c.value(), &Integer::from(4), pk.n_squared()).expect("positive exponent")
}

fn transcript_challenge(
    pk: &PaillierPublicKey,
    params: &ThresholdParams,
    c_sum: &Ciphertext,
    sigma: &PartialDecryption,
    base_commitment: &Integer,
    cipher_commitment: &Integer,
) -> Integer {
    let width = pk.element_bytes();
    let mut t = Transcript::new(DOMAIN);
    t.append(b"pk", &pk.to_bytes());
    t.append(b"params", &params.to_bytes(pk));
    t.append(b"c_sum", &c_sum.to_bytes(pk));
    t.append(b"sigma", &sigma.to_bytes(pk));
    t.append_integer(b"a", base_commitment, width);
    t.append_integer(b"b", cipher_commitment, width);
    t.challenge(b"e")
}

pub fn prove_share<R: RngCore + ?Sized>(
    pk: &PaillierPublicKey,
    share: &KeyShare,
    params: &ThresholdParams,
    c_sum: &Ciphertext,
    sigma: &PartialDecryption,
    rng: &mut R,
) -> Result<ShareCorrectnessProof, ProofError> {
    if partial_decrypt(pk, share, params, c_sum) != *sigma
        || params.verification_value(share.index) != Some(&share.verification_value)
    {
        return Err(ProofError::WitnessMismatch);
    }
    let n2 = pk.n_squared();
    let witness = Integer::from(&params.delta * share.secret());
    let rho = bigint::random_bits(rng, nonce_bits(pk, params));
    let base_commitment =
        bigint::pow_mod(&params.verification_base, &rho, n2).expect("positive exponent");
    let cipher_commitment =
        bigint::pow_mod(&cipher_base(pk, c_sum), &rho, n2).expect("positive exponent");
    let challenge = transcript_challenge(pk, params, c_sum, sigma, &base_commitment, &cipher_commitment);
    let response = rho + Integer::from(&challenge * &witness);
    Ok(ShareCorrectnessProof {
        base_commitment,
        cipher_commitment,
        challenge,
        response,
    })
}

pub fn verify_share(
    pk: &PaillierPublicKey,
    params: &ThresholdParams,
    index: u16,
    c_sum: &Ciphertext,
    sigma: &PartialDecryption,
    proof: &ShareCorrectnessProof,
) -> Result<(), ProofError> {
    if sigma.index != index {
        return Err(ProofError::IndexMismatch);
    }
    let v_i = params
        .verification_value(index)
        .ok_or(ProofError::UnknownShareIndex(index))?;
    let n2 = pk.n_squared();
    for (x, what) in [
        (c_sum.value(), "c_sum"),
        (&sigma.sigma, "sigma"),
        (&proof.base_commitment, "commitment"),
        (&proof.cipher_commitment, "commitment"),
    ] {
        if !pk.is_unit_mod_n2(x) {
            return Err(ProofError::OutOfRange(what));
        }
    }
    if proof.response < 0 || proof.response.significant_bits() > nonce_bits(pk, params) + 1 {
        return Err(ProofError::OutOfRange("response"));
    }
    let e = transcript_challenge(
        pk,
        params,
        c_sum,
        sigma,
        &proof.base_commitment,
        &proof.cipher_commitment,
    );
    if e != proof.challenge {
        return Err(ProofError::ChallengeMismatch);
    }
    let z = &proof.response;

    let lhs = bigint::pow_mod(&params.verification_base, z, n2).expect("positive exponent");
    let rhs = (bigint::pow_mod(v_i, &e, n2).expect("positive exponent") * &proof.base_commitment) % n2;
    if lhs != rhs {
        return Err(ProofError::EquationFailed("share verification key"));
    }

    let lhs = bigint::pow_mod(&cipher_base(pk, c_sum), z, n2).expect("positive exponent");
    let sigma_sq = Integer::from(sigma.sigma.square_ref()) % n2;
    let rhs = (bigint::pow_mod(&sigma_sq, &e, n2).expect("positive exponent") * &proof.cipher_commitment) % n2;
    if lhs != rhs {
        return Err(ProofError::EquationFailed("share decryption"));
    }
    Ok(())
}

impl ShareCorrectnessProof {
    pub fn encoded_len(pk: &PaillierPublicKey, params: &ThresholdParams) -> usize {
        2 * pk.element_bytes() + CHALLENGE_BYTES + response_bytes(pk, params)
    }

    pub fn to_bytes(&self, pk: &PaillierPublicKey, params: &ThresholdParams) -> Vec<u8> {
        let mut w = Writer::new();
        w.fixed(&bigint::to_fixed(&self.base_commitment, pk.element_bytes()))
            .fixed(&bigint::to_fixed(&self.cipher_commitment, pk.element_bytes()))
            .fixed(&bigint::to_fixed(&self.challenge, CHALLENGE_BYTES))
            .fixed(&bigint::to_fixed(&self.response, response_bytes(pk, params)));
        w.finish()
    }

    pub fn from_bytes(
        pk: &PaillierPublicKey,
        params: &ThresholdParams,
        bytes: &[u8],
    ) -> Result<Self, CodecError> {
        if bytes.len() != Self::encoded_len(pk, params) {
            return Err(CodecError::Invalid("share proof length"));
        }
        let mut r = Reader::new(bytes);
        Ok(Self {
            base_commitment: bigint::read_fixed(&mut r, pk.element_bytes())?,
            cipher_commitment: bigint::read_fixed(&mut r, pk.element_bytes())?,
            challenge: bigint::read_fixed(&mut r, CHALLENGE_BYTES)?,
            response: bigint::read_fixed(&mut r, response_bytes(pk, params))?,
        })
    }
}
