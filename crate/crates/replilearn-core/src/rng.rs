//! Deterministic shared randomness with named-substream derivation.
//!
//! Replicability experiments run a learner twice on resampled data while the
//! internal random string is held fixed. `SharedRandomness` is that string: a
//! 256-bit key from which any number of independent substreams can be derived
//! by `(label, index)` path segments. Identical `(root_seed, path)` always
//! yields the identical infinite stream of uniform 64-bit words; distinct
//! paths yield streams with no observable correlation.
//!
//! Derivation: the parent key seeds a ChaCha12 cipher, the FNV-1a-64 hash of
//! the path segment selects the ChaCha stream, and the child key is the first
//! 32 bytes of that stream. Reading words (`stream()`) uses stream 0 of the
//! key, which no realistic label collides with.

use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// A deterministic randomness source identified by a root seed and a
/// derivation path. Cheap to clone; all derivation is pure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SharedRandomness {
    key: [u8; 32],
}

/// FNV-1a 64-bit hash of a path segment `(label, index)`.
fn segment_hash(label: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut step = |byte: u8| {
        h ^= byte as u64;
        h = h.wrapping_mul(0x100000001b3);
    };
    for &b in label.as_bytes() {
        step(b);
    }
    step(0xff); // separator so ("ab", 1) and ("a", ...) cannot alias
    for b in index.to_le_bytes() {
        step(b);
    }
    h
}

impl SharedRandomness {
    /// Root stream for a 64-bit experiment seed.
    pub fn from_seed(root_seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(root_seed);
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        Self { key }
    }

    /// Derive the substream named by `(label, index)`.
    pub fn substream(&self, label: &str, index: u64) -> Self {
        let mut rng = ChaCha12Rng::from_seed(self.key);
        rng.set_stream(segment_hash(label, index));
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        Self { key }
    }

    /// Shorthand for `substream(label, 0)`.
    pub fn named(&self, label: &str) -> Self {
        self.substream(label, 0)
    }

    /// The infinite word stream of this node, positioned at the start.
    pub fn stream(&self) -> RandomStream {
        RandomStream {
            rng: ChaCha12Rng::from_seed(self.key),
        }
    }
}

/// Positioned reader over a `SharedRandomness` word stream.
#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: ChaCha12Rng,
}

impl RandomStream {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform double in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in [0, n). Fixed-point multiply; the O(n/2^64) bias is
    /// far below anything the harness can resolve.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Bernoulli draw with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

// rand_distr samplers (Binomial, Gamma) take any `RngCore`.
impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand_core::Error> {
        self.rng.try_fill_bytes(dest)
    }
}
