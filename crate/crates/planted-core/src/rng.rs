//! Splittable deterministic random streams.
//!
//! A [`RandomStream`] is a `(seed, path)` pair. The generator for a stream is a
//! ChaCha20 instance keyed by a SplitMix64 absorption of the seed and every
//! path element, so distinct pairs give unrelated keys and identical pairs
//! give bit-identical variate sequences.

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Concrete generator handed out by streams.
pub type StreamRng = ChaCha20Rng;

/// Deterministic stream identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RandomStream {
    /// Root seed.
    pub seed: u64,
    /// Child indices from the root.
    pub path: Vec<u64>,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    /// Root stream for `seed`.
    pub fn new(seed: u64) -> Self {
        Self { seed, path: Vec::new() }
    }

    /// Child stream `index`.
    pub fn split(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self { seed: self.seed, path }
    }

    /// 256-bit ChaCha key for this stream.
    pub fn key(&self) -> [u8; 32] {
        let mut state = mix(self.seed ^ GOLDEN);
        state = mix(state.wrapping_add(self.path.len() as u64));
        for &p in &self.path {
            state = mix(state ^ mix(p.wrapping_add(GOLDEN)));
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(GOLDEN);
            chunk.copy_from_slice(&mix(state).to_le_bytes());
        }
        key
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        ChaCha20Rng::from_seed(self.key())
    }
}

/// Child `child_index` of `parent`.
pub fn split_stream(parent: &RandomStream, child_index: u64) -> RandomStream {
    parent.split(child_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn path_extension() {
        let s = split_stream(&RandomStream::new(7), 0);
        assert_eq!(s.seed, 7);
        assert_eq!(s.path, alloc::vec![0]);
    }

    #[test]
    fn reproducible() {
        let s = RandomStream::new(11).split(3);
        let a: Vec<u64> = (0..16).map(|_| s.rng().random()).collect();
        let mut r1 = s.rng();
        let mut r2 = s.rng();
        for _ in 0..100 {
            assert_eq!(r1.random::<u64>(), r2.random::<u64>());
        }
        assert!(a.iter().all(|&x| x == a[0]));
    }

    #[test]
    fn distinct_paths_distinct_keys() {
        let root = RandomStream::new(1);
        assert_ne!(root.key(), root.split(0).key());
        assert_ne!(root.split(0).key(), root.split(1).key());
        assert_ne!(root.split(0).split(1).key(), root.split(1).split(0).key());
        assert_ne!(RandomStream::new(1).key(), RandomStream::new(2).key());
    }

    #[test]
    fn children_uncorrelated() {
        let root = RandomStream::new(7);
        let mut a = root.split(0).rng();
        let mut b = root.split(1).rng();
        let n = 100_000;
        let (mut sa, mut sb, mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let x: f64 = a.random();
            let y: f64 = b.random();
            sa += x;
            sb += y;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        let nf = n as f64;
        let cov = sab / nf - (sa / nf) * (sb / nf);
        let va = saa / nf - (sa / nf) * (sa / nf);
        let vb = sbb / nf - (sb / nf) * (sb / nf);
        let r = cov / libm::sqrt(va * vb);
        assert!(r.abs() <= 0.02, "r = {r}");
    }
}
