//! Deterministic random streams.
//!
//! Every stream is a ChaCha12 generator keyed by a mix of the root seed and a
//! small tuple of indices, so a replicate's draws depend only on its
//! coordinates and never on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type RandomSource = ChaCha12Rng;

/// Stream labels used when deriving sub-seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    Data = 0x6461_7461,
    Predictor = 0x7072_6564,
    Auxiliary = 0x6175_7869,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream from `(root_seed, tag, a, b)`.
pub fn stream(root_seed: u64, tag: StreamTag, a: u64, b: u64) -> RandomSource {
    let mut state = root_seed;
    let mut mix = splitmix64(&mut state);
    for word in [tag as u64, a, b] {
        state ^= word.wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ mix;
        mix = splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// A plain seeded stream, for callers that need only one.
pub fn seeded(seed: u64) -> RandomSource {
    stream(seed, StreamTag::Auxiliary, 0, 0)
}
