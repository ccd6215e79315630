//! Seedable, splittable random streams.
//!
//! A [`RngStream`] is just a `(seed, stream_id)` pair. Generators are
//! materialised on demand as ChaCha8 seeded from a SplitMix64 mix of the
//! pair, so the same pair yields the same numbers on every platform and
//! child streams can be derived without touching the parent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub const fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    /// Child stream `k`. Distinct `k` give independent streams, and the
    /// derivation is deterministic so nested splits form a tree of ids.
    pub fn split(&self, k: u64) -> Self {
        let id = splitmix64(self.stream_id ^ splitmix64(k.wrapping_add(0x632B_E59B_D9B4_E019)));
        Self {
            seed: self.seed,
            stream_id: id,
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut s = self.seed;
        let mut t = self.stream_id ^ 0xA076_1D64_78BD_642F;
        for chunk in key.chunks_mut(16) {
            s = splitmix64(s);
            t = splitmix64(t ^ s);
            chunk[..8].copy_from_slice(&s.to_le_bytes());
            chunk[8..].copy_from_slice(&t.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

impl Default for RngStream {
    fn default() -> Self {
        Self::new(0)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, RngCore};
    use std::collections::HashSet;

    #[test]
    fn same_pair_same_sequence() {
        let s = RngStream::new(42).split(7);
        let a: Vec<u64> = (0..8).map({
            let mut r = s.rng();
            move |_| r.next_u64()
        }).collect();
        let mut r = RngStream { seed: 42, stream_id: s.stream_id }.rng();
        let b: Vec<u64> = (0..8).map(|_| r.next_u64()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn splits_and_seeds_differ() {
        let root = RngStream::new(1);
        let mut firsts = HashSet::new();
        for k in 0..1000 {
            assert!(firsts.insert(root.split(k).rng().next_u64()));
        }
        assert_ne!(RngStream::new(1).rng().next_u64(), RngStream::new(2).rng().next_u64());
        assert_ne!(root.split(3).split(4), root.split(4).split(3));
    }

    #[test]
    fn known_first_draw_is_stable() {
        // Pin the derivation so accidental changes show up as a test failure.
        assert_eq!(RngStream::new(0).split(0).rng().next_u64(), 0xb538_15a4_074f_0990);
        let u: f64 = RngStream::new(0).split(0).rng().random();
        assert_eq!(u.to_bits(), 4_604_551_299_093_031_393);
    }
}
