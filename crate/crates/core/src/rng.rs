//! Named random streams derived from a single master seed.
//!
//! Each pipeline stage draws from its own stream, so changing how much
//! randomness one stage consumes never shifts another stage's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Locator,
    Clustering,
    Bagging,
    Synthetic,
    /// Train/holdout partitions.
    Split,
}

impl Stream {
    pub fn name(self) -> &'static str {
        match self {
            Stream::Locator => "locator",
            Stream::Clustering => "clustering",
            Stream::Bagging => "bagging",
            Stream::Synthetic => "synthetic",
            Stream::Split => "split",
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for element `index` of a named stream.
pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    // FNV-1a over the stream name keeps the tag stable across enum reorderings
    let tag = fnv1a(stream.name().as_bytes());
    splitmix64(splitmix64(master ^ tag).wrapping_add(index))
}

/// Seed keyed by a string (e.g. an entry id) rather than a position.
pub fn derive_seed_for(master: u64, stream: Stream, key: &str) -> u64 {
    derive_seed(master, stream, fnv1a(key.as_bytes()))
}

pub fn stream_rng(master: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream, index))
}
