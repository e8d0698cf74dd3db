//! Counter-based random substreams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! path of integers `(master seed, replica, purpose, ...)`. Two different
//! paths give statistically independent streams, and the stream for a
//! path never depends on which thread asks for it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream purposes used below the estimator API.
pub mod purpose {
    pub const SOUP: u64 = 1;
    pub const SHAPE: u64 = 2;
    pub const MARKS: u64 = 3;
    pub const EXPLORE: u64 = 4;
    pub const GAMMA: u64 = 5;
    pub const LOOP: u64 = 6;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a 64-bit child seed from a seed and a path.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    let mut state = splitmix64(seed);
    for &p in path {
        state = splitmix64(state ^ splitmix64(p.wrapping_mul(0xd1b5_4a32_d192_ed03)));
    }
    state
}

/// Generator for the substream addressed by `(seed, path)`.
pub fn substream(seed: u64, path: &[u64]) -> StreamRng {
    let mut state = derive(seed, path);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
