//! Partial decryption and share combination.

use std::collections::BTreeSet;

use rug::Integer;

use super::cipher::l_function;
use super::{Ciphertext, HeError, KeyShare, PaillierPublicKey, ThresholdParams};
use crate::bigint;
use crate::codec::{CodecError, Reader, Writer};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialDecryption {
    pub index: u16,
    pub sigma: Integer,
}

impl PartialDecryption {
    pub fn write(&self, pk: &PaillierPublicKey, w: &mut Writer) {
        w.u16(self.index)
            .fixed(&bigint::to_fixed(&self.sigma, pk.element_bytes()));
    }

    pub fn read(pk: &PaillierPublicKey, r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let index = r.u16()?;
        let sigma = bigint::read_fixed(r, pk.element_bytes())?;
        Ok(Self { index, sigma })
    }

    pub fn to_bytes(&self, pk: &PaillierPublicKey) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(pk, &mut w);
        w.finish()
    }
}

/// `σ_i = c^{2·Δ·s_i} mod n²`.
pub fn partial_decrypt(
    pk: &PaillierPublicKey,
    share: &KeyShare,
    params: &ThresholdParams,
    c: &Ciphertext,
) -> PartialDecryption {
    let exp = Integer::from(&params.delta * &share.secret) * 2u32;
    let sigma = bigint::pow_mod(&c.value, &exp, pk.n_squared()).expect("positive exponent");
    PartialDecryption {
        index: share.index,
        sigma,
    }
}

/// `Δ · Π_{j ∈ S, j ≠ i} j / (j − i)`, always an integer.
pub fn lagrange_at_zero(delta: &Integer, indices: &[u16], i: u16) -> Integer {
    let mut num = delta.clone();
    let mut den = Integer::from(1);
    for &j in indices {
        if j == i {
            continue;
        }
        num *= i64::from(j);
        den *= i64::from(j) - i64::from(i);
    }
    debug_assert!(num.is_divisible(&den));
    num / den
}

/// Combine at least `t` partial decryptions into the plaintext.
///
/// Uses the first `t` shares in the order given. Shares are not verified
/// here; callers check share proofs first.
pub fn combine(
    pk: &PaillierPublicKey,
    params: &ThresholdParams,
    partials: &[PartialDecryption],
) -> Result<Integer, HeError> {
    let mut seen = BTreeSet::new();
    for p in partials {
        if p.index == 0 || p.index > params.big_n {
            return Err(HeError::UnknownShareIndex(p.index));
        }
        if !seen.insert(p.index) {
            return Err(HeError::DuplicateShareIndex(p.index));
        }
    }
    let t = usize::from(params.t);
    if partials.len() < t {
        return Err(HeError::InsufficientShares {
            needed: params.t,
            got: partials.len(),
        });
    }
    let used = &partials[..t];
    let indices: Vec<u16> = used.iter().map(|p| p.index).collect();
    let n2 = pk.n_squared();

    let mut acc = Integer::from(1);
    for p in used {
        if !pk.is_unit_mod_n2(&p.sigma) {
            return Err(HeError::CombinationFailure);
        }
        let coeff = lagrange_at_zero(&params.delta, &indices, p.index) * 2u32;
        let term = bigint::pow_mod(&p.sigma, &coeff, n2).ok_or(HeError::CombinationFailure)?;
        acc = (acc * term) % n2;
    }

    // acc = (1 + n)^{4Δ²·m} = 1 + 4Δ²·m·n  (mod n²)
    if Integer::from(&acc % pk.n()) != 1 {
        return Err(HeError::CombinationFailure);
    }
    let four_delta_sq = Integer::from(params.delta.square_ref()) * 4u32;
    let normalizer = four_delta_sq
        .invert(pk.n())
        .map_err(|_| HeError::CombinationFailure)?;
    Ok((l_function(&acc, pk.n()) * normalizer) % pk.n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hebackend::{decrypt_direct, encrypt, encrypt_with, keygen};
    use crate::rng;

    #[test]
    fn lagrange_coefficients_are_integral() {
        let delta = Integer::from(120);
        let idx = [1u16, 2, 4];
        // Δ·(2·4)/((2−1)(4−1)) = 120·8/3 = 320
        assert_eq!(lagrange_at_zero(&delta, &idx, 1), 320);
        // Δ·(1·4)/((1−2)(4−2)) = −240
        assert_eq!(lagrange_at_zero(&delta, &idx, 2), -240);
        // Δ·(1·2)/((1−4)(2−4)) = 40
        assert_eq!(lagrange_at_zero(&delta, &idx, 4), 40);
        // Coefficients sum to Δ (interpolating the constant polynomial 1).
        assert_eq!(320 - 240 + 40, 120);
    }

    #[test]
    fn single_share_matches_direct() {
        let keys = keygen(512, 1, 1, &mut rng::from_seed(b"t1")).unwrap();
        let mut rng = rng::from_seed(b"t1m");
        for m in [0u32, 1, 2, 99, 65_535] {
            let (c, _) = encrypt(&keys.pk, &Integer::from(m), &mut rng).unwrap();
            let p = partial_decrypt(&keys.pk, &keys.shares[0], &keys.params, &c);
            assert_eq!(combine(&keys.pk, &keys.params, &[p]).unwrap(), decrypt_direct(&keys.secret, &c));
        }
    }

    #[test]
    fn unit_ciphertext_gives_unit_share() {
        let keys = keygen(256, 2, 3, &mut rng::from_seed(b"u")).unwrap();
        let c = encrypt_with(&keys.pk, &Integer::new(), &Integer::from(1)).unwrap();
        let p = partial_decrypt(&keys.pk, &keys.shares[1], &keys.params, &c);
        assert_eq!(p.sigma, 1);
        assert_eq!(p, partial_decrypt(&keys.pk, &keys.shares[1], &keys.params, &c));
    }

    #[test]
    fn three_of_five_subset() {
        let keys = keygen(512, 3, 5, &mut rng::from_seed(b"35")).unwrap();
        let (c, _) = encrypt(&keys.pk, &Integer::from(9), &mut rng::from_seed(b"9")).unwrap();
        let partials: Vec<_> = [1usize, 2, 4]
            .iter()
            .map(|&i| partial_decrypt(&keys.pk, &keys.shares[i - 1], &keys.params, &c))
            .collect();
        assert_eq!(combine(&keys.pk, &keys.params, &partials).unwrap(), 9);
    }

    #[test]
    fn threshold_errors() {
        let keys = keygen(256, 3, 5, &mut rng::from_seed(b"e")).unwrap();
        let (c, _) = encrypt(&keys.pk, &Integer::from(4), &mut rng::from_seed(b"e4")).unwrap();
        let p: Vec<_> = keys
            .shares
            .iter()
            .map(|s| partial_decrypt(&keys.pk, s, &keys.params, &c))
            .collect();
        assert_eq!(
            combine(&keys.pk, &keys.params, &p[..2]),
            Err(HeError::InsufficientShares { needed: 3, got: 2 })
        );
        let dup = vec![p[0].clone(), p[1].clone(), p[0].clone()];
        assert_eq!(combine(&keys.pk, &keys.params, &dup), Err(HeError::DuplicateShareIndex(1)));
        let mut bogus = p[2].clone();
        bogus.index = 9;
        assert_eq!(
            combine(&keys.pk, &keys.params, &[p[0].clone(), p[1].clone(), bogus]),
            Err(HeError::UnknownShareIndex(9))
        );
    }

    #[test]
    fn random_sigma_is_caught() {
        let keys = keygen(512, 2, 3, &mut rng::from_seed(b"r")).unwrap();
        let mut rng = rng::from_seed(b"rr");
        let (c, _) = encrypt(&keys.pk, &Integer::from(17), &mut rng).unwrap();
        let mut p: Vec<_> = keys.shares[..2]
            .iter()
            .map(|s| partial_decrypt(&keys.pk, s, &keys.params, &c))
            .collect();
        p[1].sigma = bigint::random_unit(&mut rng, keys.pk.n_squared());
        match combine(&keys.pk, &keys.params, &p) {
            Err(HeError::CombinationFailure) => {}
            Ok(m) => assert_ne!(m, 17),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
