//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha12 generator keyed by a
//! `master_seed` and positioned on a 64-bit `stream_id`. ChaCha streams with
//! the same key and different stream ids are independent keystreams, so
//! distinct `(master_seed, stream_id)` pairs never overlap.
//!
//! Stream ids for structured work (oscillator, run, SNR index, purpose) are
//! produced with [`mix_stream`], a SplitMix64 fold over the labels.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Identifier recorded in output metadata.
pub const RNG_ALGORITHM: &str =
    "ChaCha12Rng(seed_from_u64(master_seed)).set_stream(stream_id); stream_id = splitmix64 fold";

/// Seed of one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Derive a child stream by folding extra labels into the stream id.
    pub fn derive(&self, labels: &[u64]) -> Self {
        let mut all = Vec::with_capacity(labels.len() + 1);
        all.push(self.stream_id);
        all.extend_from_slice(labels);
        Self {
            master_seed: self.master_seed,
            stream_id: mix_stream(&all),
        }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold an ordered list of labels into one 64-bit stream id.
pub fn mix_stream(labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(0x6a09_e667_f3bc_c909, |acc, &l| splitmix64(acc ^ splitmix64(l)))
}
