//! Prime and safe-prime generation over a deterministic stream.
//!
//! Candidates are sieved against small primes before any Miller–Rabin work;
//! for safe primes the sieve covers both `q` and `2q + 1`.

use std::sync::OnceLock;

use rand::RngCore;
use rug::integer::IsPrime;
use rug::Integer;

use crate::bigint;

const SIEVE_LIMIT: u32 = 1 << 13;
const MR_ROUNDS: u32 = 32;
/// Odd steps walked from one random start before resampling.
const MAX_WALK: u32 = 1 << 16;

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut composite = vec![false; SIEVE_LIMIT as usize];
        let mut out = Vec::new();
        for i in 2..SIEVE_LIMIT {
            if !composite[i as usize] {
                if i > 2 {
                    out.push(i);
                }
                let mut j = i * i;
                while j < SIEVE_LIMIT {
                    composite[j as usize] = true;
                    j += i;
                }
            }
        }
        out
    })
}

/// Random odd integer of exactly `bits` bits with the top two bits set.
fn candidate<R: RngCore + ?Sized>(rng: &mut R, bits: u32) -> Integer {
    let mut x = bigint::random_bits(rng, bits);
    x.set_bit(bits - 1, true);
    x.set_bit(bits - 2, true);
    x.set_bit(0, true);
    x
}

fn probably_prime(x: &Integer) -> bool {
    x.is_probably_prime(MR_ROUNDS) != IsPrime::No
}

/// A prime of exactly `bits` bits; `None` after `attempts` fresh starts.
pub fn random_prime<R: RngCore + ?Sized>(rng: &mut R, bits: u32, attempts: u32) -> Option<Integer> {
    assert!(bits >= 8);
    let primes = small_primes();
    for _ in 0..attempts {
        let start = candidate(rng, bits);
        let mut residues: Vec<u32> = primes.iter().map(|&p| start.mod_u(p)).collect();
        let mut x = start;
        for _ in 0..MAX_WALK {
            if x.significant_bits() != bits {
                break;
            }
            let sieved = residues.iter().all(|&r| r != 0);
            if sieved && probably_prime(&x) {
                return Some(x);
            }
            x += 2u32;
            for (r, &p) in residues.iter_mut().zip(primes) {
                *r = (*r + 2) % p;
            }
        }
    }
    None
}

/// A safe prime `p = 2q + 1` of exactly `bits` bits; returns `(p, q)`.
pub fn random_safe_prime<R: RngCore + ?Sized>(
    rng: &mut R,
    bits: u32,
    attempts: u32,
) -> Option<(Integer, Integer)> {
    assert!(bits >= 16);
    let primes = small_primes();
    let two = Integer::from(2);
    for _ in 0..attempts {
        let start = candidate(rng, bits - 1);
        let mut residues: Vec<u32> = primes.iter().map(|&p| start.mod_u(p)).collect();
        let mut q = start;
        for _ in 0..MAX_WALK {
            if q.significant_bits() != bits - 1 {
                break;
            }
            let sieved = residues
                .iter()
                .zip(primes)
                .all(|(&r, &p)| r != 0 && (2 * r + 1) % p != 0);
            if sieved {
                let p = Integer::from(&q << 1) + 1u32;
                // Cheap Fermat filter on p before the full tests.
                let fermat = two.pow_mod_ref(&Integer::from(&p - 1u32), &p).map(Integer::from);
                if fermat.is_some_and(|f| f == 1) && probably_prime(&q) && probably_prime(&p) {
                    return Some((p, q));
                }
            }
            q += 2u32;
            for (r, &p) in residues.iter_mut().zip(primes) {
                *r = (*r + 2) % p;
            }
        }
    }
    None
}
