use rand::RngCore;
use rug::Integer;

use super::{FullSecretKey, HeError, PaillierPublicKey};
use crate::bigint;
use crate::codec::CodecError;

/// An element of `Z*_{n²}`.
///
/// Decoding does not check membership (the modulus is not known at that
/// point); every verification path calls [`PaillierPublicKey::is_unit_mod_n2`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ciphertext {
    pub(crate) value: Integer,
}

impl Ciphertext {
    pub fn from_value(value: Integer) -> Self {
        Self { value }
    }

    pub fn value(&self) -> &Integer {
        &self.value
    }

    /// Fixed-width big-endian encoding, `2·⌈bits/8⌉` bytes.
    pub fn to_bytes(&self, pk: &PaillierPublicKey) -> Vec<u8> {
        bigint::to_fixed(&self.value, pk.element_bytes())
    }

    pub fn from_bytes(pk: &PaillierPublicKey, bytes: &[u8]) -> Result<Self, CodecError> {
        if bytes.len() != pk.element_bytes() {
            return Err(CodecError::Invalid("ciphertext width"));
        }
        Ok(Self {
            value: bigint::from_be(bytes),
        })
    }
}

/// `L(u) = (u − 1) / n`.
pub(crate) fn l_function(u: &Integer, n: &Integer) -> Integer {
    Integer::from(u - 1u32) / n
}

/// `g^m mod n²` with `g = n + 1`, i.e. `1 + m·n`.
pub(crate) fn g_pow(pk: &PaillierPublicKey, m: &Integer) -> Integer {
    (Integer::from(m * pk.n()) + 1u32) % pk.n_squared()
}

/// Encrypt with a caller-chosen randomizer.
pub fn encrypt_with(pk: &PaillierPublicKey, m: &Integer, r: &Integer) -> Result<Ciphertext, HeError> {
    if *m < 0 || m >= pk.n() {
        return Err(HeError::PlaintextOutOfRange);
    }
    if *r <= 0 || r >= pk.n() || !bigint::coprime(r, pk.n()) {
        return Err(HeError::BadRandomizer);
    }
    Ok(Ciphertext {
        value: raw_encrypt(pk, m, r),
    })
}

/// `g^m · r^n mod n²` without range checks; verifiers use this to recompute
/// ciphertexts from untrusted witnesses.
pub(crate) fn raw_encrypt(pk: &PaillierPublicKey, m: &Integer, r: &Integer) -> Integer {
    let rn = bigint::pow_mod(r, pk.n(), pk.n_squared()).expect("positive exponent");
    (g_pow(pk, m) * rn) % pk.n_squared()
}

/// Encrypt with a fresh randomizer, returning it for use as a proof witness.
pub fn encrypt<R: RngCore + ?Sized>(
    pk: &PaillierPublicKey,
    m: &Integer,
    rng: &mut R,
) -> Result<(Ciphertext, Integer), HeError> {
    if *m < 0 || m >= pk.n() {
        return Err(HeError::PlaintextOutOfRange);
    }
    let r = bigint::random_unit(rng, pk.n());
    let c = encrypt_with(pk, m, &r)?;
    Ok((c, r))
}

/// Homomorphic addition: the product decrypts to `(m_a + m_b) mod n`.
pub fn add(pk: &PaillierPublicKey, a: &Ciphertext, b: &Ciphertext) -> Ciphertext {
    Ciphertext {
        value: Integer::from(&a.value * &b.value) % pk.n_squared(),
    }
}

/// Left fold of [`add`]; `None` for an empty input.
pub fn sum<'a, I>(pk: &PaillierPublicKey, ciphertexts: I) -> Option<Ciphertext>
where
    I: IntoIterator<Item = &'a Ciphertext>,
{
    let mut it = ciphertexts.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, c| add(pk, &acc, c)))
}

/// Textbook decryption `L(c^λ mod n²)·μ mod n`. Test oracle only.
pub fn decrypt_direct(sk: &FullSecretKey, c: &Ciphertext) -> Integer {
    let pk = &sk.pk;
    let u = bigint::pow_mod(&c.value, &sk.lambda, pk.n_squared()).expect("positive exponent");
    (l_function(&u, pk.n()) * &sk.mu) % pk.n()
}
