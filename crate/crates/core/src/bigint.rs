//! Glue between `rug::Integer`, fixed-width byte strings and the CSPRNG.

use rand::RngCore;
use rug::integer::Order;
use rug::Integer;

use crate::codec::CodecError;

/// Bytes needed for a non-negative integer of `bits` bits.
pub fn byte_len(bits: u32) -> usize {
    bits.div_ceil(8) as usize
}

/// Big-endian encoding left-padded to `width` bytes.
///
/// Panics if `x` is negative or does not fit; callers only encode values
/// already reduced modulo a key-sized modulus.
pub fn to_fixed(x: &Integer, width: usize) -> Vec<u8> {
    assert!(*x >= 0, "cannot encode a negative integer");
    let digits = x.to_digits::<u8>(Order::Msf);
    assert!(digits.len() <= width, "integer wider than {width} bytes");
    let mut out = vec![0u8; width - digits.len()];
    out.extend_from_slice(&digits);
    out
}

pub fn from_be(bytes: &[u8]) -> Integer {
    Integer::from_digits(bytes, Order::Msf)
}

/// Minimal big-endian encoding (used for unbounded proof responses).
pub fn to_minimal(x: &Integer) -> Vec<u8> {
    x.to_digits::<u8>(Order::Msf)
}

/// Length-prefixed minimal encoding; zero is the empty string.
pub fn write_minimal(w: &mut crate::codec::Writer, x: &Integer) {
    w.var(&to_minimal(x));
}

/// Inverse of [`write_minimal`], rejecting leading zero bytes so every value
/// has exactly one encoding.
pub fn read_minimal(r: &mut crate::codec::Reader<'_>) -> Result<Integer, CodecError> {
    let bytes = r.var()?;
    if bytes.first() == Some(&0) {
        return Err(CodecError::Invalid("non-minimal integer"));
    }
    Ok(from_be(bytes))
}

/// Reads exactly `width` bytes as an integer.
pub fn read_fixed(r: &mut crate::codec::Reader<'_>, width: usize) -> Result<Integer, CodecError> {
    Ok(from_be(r.fixed(width)?))
}

/// Uniform integer in `[0, 2^bits)`.
pub fn random_bits<R: RngCore + ?Sized>(rng: &mut R, bits: u32) -> Integer {
    let mut buf = vec![0u8; byte_len(bits)];
    rng.fill_bytes(&mut buf);
    let mut x = from_be(&buf);
    x.keep_bits_mut(bits);
    x
}

/// Uniform integer in `[0, bound)` by rejection sampling.
pub fn random_below<R: RngCore + ?Sized>(rng: &mut R, bound: &Integer) -> Integer {
    assert!(*bound > 0, "empty sampling range");
    let bits = bound.significant_bits();
    loop {
        let x = random_bits(rng, bits);
        if x < *bound {
            return x;
        }
    }
}

/// Uniform element of `Z*_n`.
pub fn random_unit<R: RngCore + ?Sized>(rng: &mut R, n: &Integer) -> Integer {
    loop {
        let x = random_below(rng, n);
        if x != 0 && coprime(&x, n) {
            return x;
        }
    }
}

pub fn coprime(a: &Integer, b: &Integer) -> bool {
    Integer::from(a.gcd_ref(b)) == 1
}

/// `base^exp mod modulus`, accepting negative exponents for invertible bases.
pub fn pow_mod(base: &Integer, exp: &Integer, modulus: &Integer) -> Option<Integer> {
    base.pow_mod_ref(exp, modulus).map(Integer::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_width_pads_on_the_left() {
        assert_eq!(to_fixed(&Integer::from(0x0102), 4), vec![0, 0, 1, 2]);
        assert_eq!(from_be(&[0, 0, 1, 2]), 0x0102);
        assert_eq!(to_fixed(&Integer::new(), 2), vec![0, 0]);
    }

    #[test]
    #[should_panic]
    fn oversized_integer_panics() {
        to_fixed(&Integer::from(0x10000), 2);
    }

    #[test]
    fn sampling_respects_bounds() {
        let mut rng = crate::rng::from_seed(b"bounds");
        let bound = Integer::from(35);
        for _ in 0..200 {
            let u = random_unit(&mut rng, &bound);
            assert!(u > 0 && u < 35);
            assert!(coprime(&u, &bound));
        }
    }

    #[test]
    fn negative_exponent_inverts() {
        let m = Integer::from(35);
        let inv = pow_mod(&Integer::from(2), &Integer::from(-1), &m).unwrap();
        assert_eq!(inv, 18);
    }
}
