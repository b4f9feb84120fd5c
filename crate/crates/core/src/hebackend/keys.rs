//! Trusted-dealer key generation for threshold Paillier (`s = 1`, `g = n + 1`).
//!
//! The dealer picks `d` with `d ≡ 0 (mod λ)` and `d ≡ 1 (mod n)` and shares it
//! with a degree `t − 1` polynomial over `Z_{nλ}`. Shares are later combined
//! with integer Lagrange coefficients scaled by `Δ = N!`, so nobody needs an
//! inverse modulo the secret `nλ`.

use rand::RngCore;
use rug::Integer;

use super::{primes, HeError};
use crate::bigint;
use crate::codec::{CodecError, Reader, Writer};

/// Keys below this size use plain random primes instead of safe primes.
pub const SAFE_PRIME_THRESHOLD: u32 = 1024;
pub const MIN_TOY_BITS: u32 = 256;
pub const MAX_SHARES: u16 = 64;
const PRIME_ATTEMPTS: u32 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaillierPublicKey {
    n: Integer,
    g: Integer,
    n_squared: Integer,
}

impl PaillierPublicKey {
    pub fn from_modulus(n: Integer) -> Result<Self, HeError> {
        if n < 15 || n.is_even() {
            return Err(HeError::InvalidModulus);
        }
        let g = Integer::from(&n + 1u32);
        let n_squared = Integer::from(n.square_ref());
        Ok(Self { n, g, n_squared })
    }

    pub fn n(&self) -> &Integer {
        &self.n
    }

    pub fn g(&self) -> &Integer {
        &self.g
    }

    pub fn n_squared(&self) -> &Integer {
        &self.n_squared
    }

    /// Bit length of the modulus.
    pub fn bits(&self) -> u32 {
        self.n.significant_bits()
    }

    /// Width of an encoded element of `Z_n`.
    pub fn modulus_bytes(&self) -> usize {
        bigint::byte_len(self.bits())
    }

    /// Width of an encoded element of `Z*_{n²}`.
    pub fn element_bytes(&self) -> usize {
        2 * self.modulus_bytes()
    }

    /// `true` iff `0 < x < n²` and `gcd(x, n) = 1`.
    pub fn is_unit_mod_n2(&self, x: &Integer) -> bool {
        *x > 0 && *x < self.n_squared && bigint::coprime(x, &self.n)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.finish()
    }

    pub fn write(&self, w: &mut Writer) {
        let bits = u16::try_from(self.bits()).expect("modulus wider than 65535 bits");
        w.u16(bits).fixed(&bigint::to_fixed(&self.n, self.modulus_bytes()));
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let bits = u32::from(r.u16()?);
        let n = bigint::read_fixed(r, bigint::byte_len(bits))?;
        if n.significant_bits() != bits {
            return Err(CodecError::Invalid("modulus width"));
        }
        Self::from_modulus(n).map_err(|_| CodecError::Invalid("modulus"))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let pk = Self::read(&mut r)?;
        r.finish()?;
        Ok(pk)
    }
}

/// The undivided decryption key. Kept only so tests can compare threshold
/// decryption against textbook decryption.
#[derive(Clone, Debug)]
pub struct FullSecretKey {
    pub(crate) p: Integer,
    pub(crate) q: Integer,
    pub(crate) lambda: Integer,
    pub(crate) mu: Integer,
    pub(crate) pk: PaillierPublicKey,
}

impl FullSecretKey {
    /// Textbook key from two distinct odd primes.
    pub fn from_primes(p: Integer, q: Integer) -> Result<Self, HeError> {
        if p == q || p < 3 || q < 3 {
            return Err(HeError::InvalidModulus);
        }
        let n = Integer::from(&p * &q);
        let lambda = Integer::from(&p - 1u32).lcm(&Integer::from(&q - 1u32));
        let mu = lambda.invert_ref(&n).map(Integer::from).ok_or(HeError::InvalidModulus)?;
        let pk = PaillierPublicKey::from_modulus(n)?;
        Ok(Self { p, q, lambda, mu, pk })
    }

    pub fn public_key(&self) -> &PaillierPublicKey {
        &self.pk
    }

    pub fn primes(&self) -> (&Integer, &Integer) {
        (&self.p, &self.q)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyShare {
    pub index: u16,
    pub(crate) secret: Integer,
    pub verification_value: Integer,
}

impl KeyShare {
    pub fn secret(&self) -> &Integer {
        &self.secret
    }

    /// `index ‖ s_i ‖ v_i`; `s_i` is stored at element width since it lives
    /// in `Z_{nλ}`.
    pub fn to_bytes(&self, pk: &PaillierPublicKey) -> Vec<u8> {
        let width = pk.element_bytes();
        let mut w = Writer::new();
        w.u16(self.index)
            .fixed(&bigint::to_fixed(&self.secret, width))
            .fixed(&bigint::to_fixed(&self.verification_value, width));
        w.finish()
    }

    pub fn from_bytes(pk: &PaillierPublicKey, bytes: &[u8]) -> Result<Self, CodecError> {
        let width = pk.element_bytes();
        let mut r = Reader::new(bytes);
        let index = r.u16()?;
        let secret = bigint::read_fixed(&mut r, width)?;
        let verification_value = bigint::read_fixed(&mut r, width)?;
        r.finish()?;
        Ok(Self {
            index,
            secret,
            verification_value,
        })
    }
}

/// Public threshold parameters published with the election configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdParams {
    pub t: u16,
    pub big_n: u16,
    pub delta: Integer,
    pub verification_base: Integer,
    /// `v_i = v^{Δ·s_i}`, indexed by `share index − 1`.
    pub share_verification: Vec<Integer>,
}

impl ThresholdParams {
    pub fn verification_value(&self, index: u16) -> Option<&Integer> {
        if index == 0 {
            return None;
        }
        self.share_verification.get(usize::from(index) - 1)
    }

    pub fn write(&self, pk: &PaillierPublicKey, w: &mut Writer) {
        let width = pk.element_bytes();
        w.u16(self.t).u16(self.big_n);
        w.fixed(&bigint::to_fixed(&self.verification_base, width));
        for v in &self.share_verification {
            w.fixed(&bigint::to_fixed(v, width));
        }
    }

    pub fn read(pk: &PaillierPublicKey, r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let width = pk.element_bytes();
        let t = r.u16()?;
        let big_n = r.u16()?;
        if t == 0 || t > big_n || big_n > MAX_SHARES {
            return Err(CodecError::Invalid("threshold"));
        }
        let verification_base = bigint::read_fixed(r, width)?;
        let share_verification = (0..big_n)
            .map(|_| bigint::read_fixed(r, width))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            t,
            big_n,
            delta: factorial(big_n),
            verification_base,
            share_verification,
        })
    }

    pub fn to_bytes(&self, pk: &PaillierPublicKey) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(pk, &mut w);
        w.finish()
    }
}

pub fn factorial(n: u16) -> Integer {
    Integer::from(Integer::factorial(u32::from(n)))
}

/// Everything the dealer hands out.
#[derive(Clone, Debug)]
pub struct ThresholdKeys {
    pub pk: PaillierPublicKey,
    pub shares: Vec<KeyShare>,
    pub params: ThresholdParams,
    pub secret: FullSecretKey,
}

fn check_threshold(t: u16, big_n: u16) -> Result<(), HeError> {
    if t == 0 || t > big_n || big_n > MAX_SHARES {
        return Err(HeError::InvalidThreshold { t, big_n });
    }
    Ok(())
}

/// Generate a fresh `(t, N)` threshold key of `bits` bits.
///
/// Keys of at least [`SAFE_PRIME_THRESHOLD`] bits use safe primes.
pub fn keygen<R: RngCore + ?Sized>(
    bits: u32,
    t: u16,
    big_n: u16,
    rng: &mut R,
) -> Result<ThresholdKeys, HeError> {
    check_threshold(t, big_n)?;
    if bits < MIN_TOY_BITS || !bits.is_multiple_of(2) || bits > u32::from(u16::MAX) {
        return Err(HeError::InvalidKeySize(bits));
    }
    let half = bits / 2;
    for _ in 0..PRIME_ATTEMPTS {
        let (p, q) = if bits >= SAFE_PRIME_THRESHOLD {
            let (p, _) = primes::random_safe_prime(rng, half, PRIME_ATTEMPTS)
                .ok_or(HeError::PrimeGenerationFailure)?;
            let (q, _) = primes::random_safe_prime(rng, half, PRIME_ATTEMPTS)
                .ok_or(HeError::PrimeGenerationFailure)?;
            (p, q)
        } else {
            let p = primes::random_prime(rng, half, PRIME_ATTEMPTS)
                .ok_or(HeError::PrimeGenerationFailure)?;
            let q = primes::random_prime(rng, half, PRIME_ATTEMPTS)
                .ok_or(HeError::PrimeGenerationFailure)?;
            (p, q)
        };
        match keygen_from_primes(p, q, t, big_n, rng) {
            Ok(keys) => return Ok(keys),
            // Equal primes or gcd(n, λ) ≠ 1: draw again.
            Err(HeError::InvalidModulus) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(HeError::PrimeGenerationFailure)
}

/// Deal threshold shares for a key built from known primes.
pub fn keygen_from_primes<R: RngCore + ?Sized>(
    p: Integer,
    q: Integer,
    t: u16,
    big_n: u16,
    rng: &mut R,
) -> Result<ThresholdKeys, HeError> {
    check_threshold(t, big_n)?;
    let secret = FullSecretKey::from_primes(p, q)?;
    let pk = secret.pk.clone();
    let n = pk.n();
    let lambda = &secret.lambda;
    let delta = factorial(big_n);
    let four_delta_sq = Integer::from(delta.square_ref()) * 4u32;
    if !bigint::coprime(n, lambda) || !bigint::coprime(n, &four_delta_sq) {
        return Err(HeError::InvalidModulus);
    }

    // d ≡ 0 (mod λ), d ≡ 1 (mod n)  ⇒  d = λ·(λ⁻¹ mod n).
    let d = Integer::from(lambda * &secret.mu);
    let share_modulus = Integer::from(n * lambda);

    let mut coefficients = vec![d];
    for _ in 1..t {
        coefficients.push(bigint::random_below(rng, &share_modulus));
    }

    let n2 = pk.n_squared();
    let r = bigint::random_unit(rng, n2);
    let verification_base = Integer::from(r.square_ref()) % n2;

    let mut shares = Vec::with_capacity(usize::from(big_n));
    let mut share_verification = Vec::with_capacity(usize::from(big_n));
    for index in 1..=big_n {
        let secret_share = eval_poly(&coefficients, u32::from(index), &share_modulus);
        let exp = Integer::from(&delta * &secret_share);
        let v_i = bigint::pow_mod(&verification_base, &exp, n2).expect("positive exponent");
        share_verification.push(v_i.clone());
        shares.push(KeyShare {
            index,
            secret: secret_share,
            verification_value: v_i,
        });
    }

    let params = ThresholdParams {
        t,
        big_n,
        delta,
        verification_base,
        share_verification,
    };
    Ok(ThresholdKeys {
        pk,
        shares,
        params,
        secret,
    })
}

fn eval_poly(coefficients: &[Integer], x: u32, modulus: &Integer) -> Integer {
    let mut acc = Integer::new();
    for c in coefficients.iter().rev() {
        acc *= x;
        acc += c;
        acc %= modulus;
    }
    acc
}
