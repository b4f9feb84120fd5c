//! Proof that a Paillier ciphertext encrypts 0 or 1.
//!
//! An OR-composition of two proofs of knowledge of an `n`-th root: for the
//! true choice `v`, `c·g^{-v}` is `r^n`; the other branch is simulated.
//! Branch 0 is always serialized first.

use rand::RngCore;
use rug::Integer;

use super::transcript::{Transcript, CHALLENGE_BITS};
use super::ProofError;
use crate::bigint;
use crate::codec::{CodecError, Reader, Writer};
use crate::hebackend::{raw_encrypt, Ciphertext, PaillierPublicKey};

const DOMAIN: &[u8] = b"sdvote/enc-validity/v1";
const CHALLENGE_BYTES: usize = (CHALLENGE_BITS / 8) as usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncValidityProof {
    pub commitments: [Integer; 2],
    pub challenges: [Integer; 2],
    pub responses: [Integer; 2],
}

/// `c · g^{-j} mod n²`; `(1 + n)^{-1} = 1 − n`.
fn shifted(pk: &PaillierPublicKey, c: &Integer, j: usize) -> Integer {
    if j == 0 {
        return c.clone();
    }
    let inv_g = Integer::from(pk.n_squared() - pk.n()) + 1u32;
    Integer::from(c * &inv_g) % pk.n_squared()
}

fn transcript_challenge(
    pk: &PaillierPublicKey,
    c: &Ciphertext,
    context: &[u8],
    commitments: &[Integer; 2],
) -> Integer {
    let mut t = Transcript::new(DOMAIN);
    t.append(b"context", context);
    t.append(b"pk", &pk.to_bytes());
    t.append(b"ciphertext", &c.to_bytes(pk));
    for a in commitments {
        t.append_integer(b"commitment", a, pk.element_bytes());
    }
    t.challenge(b"e")
}

/// Prove `c = Enc(v; r)` with `v ∈ {0, 1}`, bound to `context`.
pub fn prove_enc_validity<R: RngCore + ?Sized>(
    pk: &PaillierPublicKey,
    c: &Ciphertext,
    v: u64,
    r: &Integer,
    context: &[u8],
    rng: &mut R,
) -> Result<EncValidityProof, ProofError> {
    if v > 1 || *r <= 0 || r >= pk.n() || !bigint::coprime(r, pk.n()) {
        return Err(ProofError::WitnessMismatch);
    }
    if raw_encrypt(pk, &Integer::from(v), r) != *c.value() {
        return Err(ProofError::WitnessMismatch);
    }
    let n = pk.n();
    let n2 = pk.n_squared();
    let real = v as usize;
    let sim = 1 - real;

    let mut commitments = [Integer::new(), Integer::new()];
    let mut challenges = [Integer::new(), Integer::new()];
    let mut responses = [Integer::new(), Integer::new()];

    // Simulated branch: pick (e, z), solve for a = z^n · u^{-e}.
    challenges[sim] = bigint::random_bits(rng, CHALLENGE_BITS);
    responses[sim] = bigint::random_unit(rng, n);
    let u_sim = shifted(pk, c.value(), sim);
    let neg_e = Integer::from(-&challenges[sim]);
    let zn = bigint::pow_mod(&responses[sim], n, n2).expect("positive exponent");
    let u_inv_e = bigint::pow_mod(&u_sim, &neg_e, n2).ok_or(ProofError::WitnessMismatch)?;
    commitments[sim] = (zn * u_inv_e) % n2;

    let rho = bigint::random_unit(rng, n);
    commitments[real] = bigint::pow_mod(&rho, n, n2).expect("positive exponent");

    let e = transcript_challenge(pk, c, context, &commitments);
    challenges[real] = (e - &challenges[sim]).keep_bits(CHALLENGE_BITS);
    let r_e = bigint::pow_mod(r, &challenges[real], n).expect("positive exponent");
    responses[real] = (rho * r_e) % n;

    Ok(EncValidityProof {
        commitments,
        challenges,
        responses,
    })
}

/// Accept iff both branch equations hold and the branch challenges add up to
/// the transcript challenge.
pub fn verify_enc_validity(
    pk: &PaillierPublicKey,
    c: &Ciphertext,
    proof: &EncValidityProof,
    context: &[u8],
) -> Result<(), ProofError> {
    let n = pk.n();
    let n2 = pk.n_squared();
    if !pk.is_unit_mod_n2(c.value()) {
        return Err(ProofError::OutOfRange("ciphertext"));
    }
    for j in 0..2 {
        if !pk.is_unit_mod_n2(&proof.commitments[j]) {
            return Err(ProofError::OutOfRange("commitment"));
        }
        if proof.challenges[j] < 0 || proof.challenges[j].significant_bits() > CHALLENGE_BITS {
            return Err(ProofError::OutOfRange("challenge"));
        }
        let z = &proof.responses[j];
        if *z <= 0 || z >= n || !bigint::coprime(z, n) {
            return Err(ProofError::OutOfRange("response"));
        }
    }
    let e = transcript_challenge(pk, c, context, &proof.commitments);
    let sum = Integer::from(&proof.challenges[0] + &proof.challenges[1]).keep_bits(CHALLENGE_BITS);
    if sum != e {
        return Err(ProofError::ChallengeMismatch);
    }
    for j in 0..2 {
        let lhs = bigint::pow_mod(&proof.responses[j], n, n2).expect("positive exponent");
        let u = shifted(pk, c.value(), j);
        let ue = bigint::pow_mod(&u, &proof.challenges[j], n2).expect("positive exponent");
        let rhs = Integer::from(&proof.commitments[j] * &ue) % n2;
        if lhs != rhs {
            return Err(ProofError::EquationFailed("enc-validity branch"));
        }
    }
    Ok(())
}

impl EncValidityProof {
    /// `a_0 ‖ a_1 ‖ e_0 ‖ e_1 ‖ z_0 ‖ z_1`, each at fixed width.
    pub fn to_bytes(&self, pk: &PaillierPublicKey) -> Vec<u8> {
        let mut w = Writer::new();
        for a in &self.commitments {
            w.fixed(&bigint::to_fixed(a, pk.element_bytes()));
        }
        for e in &self.challenges {
            w.fixed(&bigint::to_fixed(e, CHALLENGE_BYTES));
        }
        for z in &self.responses {
            w.fixed(&bigint::to_fixed(z, pk.modulus_bytes()));
        }
        w.finish()
    }

    pub fn encoded_len(pk: &PaillierPublicKey) -> usize {
        2 * pk.element_bytes() + 2 * CHALLENGE_BYTES + 2 * pk.modulus_bytes()
    }

    pub fn from_bytes(pk: &PaillierPublicKey, bytes: &[u8]) -> Result<Self, CodecError> {
        if bytes.len() != Self::encoded_len(pk) {
            return Err(CodecError::Invalid("enc-validity proof length"));
        }
        let mut r = Reader::new(bytes);
        let mut read = |width| bigint::read_fixed(&mut r, width);
        let commitments = [read(pk.element_bytes())?, read(pk.element_bytes())?];
        let challenges = [read(CHALLENGE_BYTES)?, read(CHALLENGE_BYTES)?];
        let responses = [read(pk.modulus_bytes())?, read(pk.modulus_bytes())?];
        Ok(Self {
            commitments,
            challenges,
            responses,
        })
    }
}
