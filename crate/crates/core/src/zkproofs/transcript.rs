//! Fiat–Shamir transcript: a running SHA-256 over length-prefixed messages.

use rug::Integer;
use sha2::{Digest, Sha256};

use crate::bigint;

/// Bits of every sigma-protocol challenge.
pub const CHALLENGE_BITS: u32 = 128;

#[derive(Clone)]
pub struct Transcript {
    hasher: Sha256,
}

impl Transcript {
    /// Start a transcript under a protocol-specific domain tag.
    pub fn new(domain: &'static [u8]) -> Self {
        let mut t = Self {
            hasher: Sha256::new(),
        };
        t.append(b"domain", domain);
        t
    }

    pub fn append(&mut self, label: &'static [u8], data: &[u8]) {
        self.hasher.update((label.len() as u32).to_be_bytes());
        self.hasher.update(label);
        self.hasher.update((data.len() as u64).to_be_bytes());
        self.hasher.update(data);
    }

    pub fn append_integer(&mut self, label: &'static [u8], x: &Integer, width: usize) {
        self.append(label, &bigint::to_fixed(x, width));
    }

    /// A 128-bit challenge; the transcript keeps absorbing afterwards.
    pub fn challenge(&mut self, label: &'static [u8]) -> Integer {
        self.append(b"challenge", label);
        let digest = self.hasher.clone().finalize();
        self.hasher.update(digest);
        bigint::from_be(&digest[..(CHALLENGE_BITS / 8) as usize])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn challenge_is_pure_function_of_inputs() {
        let run = |data: &[u8]| {
            let mut t = Transcript::new(b"test");
            t.append(b"x", data);
            t.challenge(b"e")
        };
        assert_eq!(run(b"abc"), run(b"abc"));
        assert_ne!(run(b"abc"), run(b"abd"));
        assert!(run(b"abc").significant_bits() <= CHALLENGE_BITS);
    }

    #[test]
    fn domains_separate() {
        let mut a = Transcript::new(b"one");
        let mut b = Transcript::new(b"two");
        assert_ne!(a.challenge(b"e"), b.challenge(b"e"));
    }

    #[test]
    fn length_prefix_prevents_shifting() {
        let mut a = Transcript::new(b"d");
        a.append(b"x", b"ab");
        a.append(b"x", b"c");
        let mut b = Transcript::new(b"d");
        b.append(b"x", b"a");
        b.append(b"x", b"bc");
        assert_ne!(a.challenge(b"e"), b.challenge(b"e"));
    }
}
