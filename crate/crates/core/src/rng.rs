//! Deterministic random-number streams.
//!
//! Every stochastic draw in a run comes from a ChaCha8 stream whose key is
//! derived from the experiment seed plus a stream index (one stream per
//! session, one per probe batch, and so on). Streams are independent of
//! scheduling: running sessions in any order, or in parallel, consumes the
//! same per-session draw sequences, so results are bit-reproducible across
//! runs and platforms.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The single RNG type used for all sampling in the simulator.
pub type SessionRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 step; the standard seed-expansion mixer.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes two words into one; used to fold stream labels into a seed.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut state = a ^ b.wrapping_mul(GOLDEN);
    splitmix64(&mut state)
}

/// Derives the RNG stream for `(master_seed, stream_index)`.
///
/// The 256-bit ChaCha key is expanded from the pair with SplitMix64, so
/// distinct indices give unrelated streams and the same pair always gives
/// the same stream.
pub fn derive_stream(master_seed: u64, stream_index: u64) -> SessionRng {
    let mut state = mix(master_seed, stream_index);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    SessionRng::from_seed(key)
}
