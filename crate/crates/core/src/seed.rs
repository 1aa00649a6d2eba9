//! Deterministic seed derivation for independent random streams.
//!
//! Every randomized component (weight init, dropout, shuffling, data
//! generation) draws from its own ChaCha8 stream whose seed is derived from
//! one user-facing seed plus a component tag. Streams derived with different
//! tags or indices are statistically independent, and the same inputs always
//! yield the same stream on every platform.

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

// Finalizer from the splitmix64 generator; full-avalanche, so seeds that
// differ in one bit give unrelated outputs.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed for the component named `tag` under the base seed.
pub fn derive(base: u64, tag: &str) -> u64 {
    splitmix(base ^ fnv1a(tag.as_bytes()))
}

/// Derives the seed for the `index`-th instance of the component named `tag`.
pub fn derive_indexed(base: u64, tag: &str, index: u64) -> u64 {
    splitmix(derive(base, tag).wrapping_add(index))
}

/// A ChaCha8 stream for the component named `tag` under the base seed.
pub fn rng(base: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, tag))
}

/// A ChaCha8 stream for the `index`-th instance of the component named `tag`.
pub fn rng_indexed(base: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_indexed(base, tag, index))
}

/// Splitmix64 counter stream for high-volume Bernoulli draws (dropout masks).
///
/// Training consumes billions of mask bits; this stream is an order of
/// magnitude cheaper than a cryptographic generator while staying platform
/// stable and fully determined by its seed.
#[derive(Debug, Clone)]
pub(crate) struct MaskStream {
    state: u64,
}

impl MaskStream {
    pub(crate) fn new(seed: u64) -> Self {
        MaskStream { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        splitmix(self.state)
    }

    /// One keep/drop decision with drop probability `p`; `threshold` must be
    /// [`Self::threshold`] of `p`.
    pub(crate) fn keep(&mut self, threshold: u64) -> bool {
        self.next_u64() >= threshold
    }

    /// Integer threshold such that `u64 < threshold` has probability `p`.
    pub(crate) fn threshold(p: f64) -> u64 {
        debug_assert!((0.0..1.0).contains(&p));
        // Saturating float-to-int cast; exact to f64 precision.
        (p * 2.0_f64.powi(64)) as u64
    }
}
