//! Seeded random sub-streams.
//!
//! Every random draw in a run comes from a ChaCha8 stream keyed by
//! `(seed, realization, purpose)`. Streams never share state, so the draw for
//! one purpose does not depend on which other purposes were used.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RandomStream = ChaCha8Rng;

/// What a sub-stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamTag {
    TxToRis = 1,
    RisToRx = 2,
    RandDesign = 3,
    RandPhaseDesign = 4,
    Verify = 5,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for `(seed, realization, tag)`.
pub fn substream(seed: u64, realization: u64, tag: StreamTag) -> RandomStream {
    let mut state = seed;
    let mut state = splitmix64(&mut state) ^ realization;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(tag as u64);
    rng
}
