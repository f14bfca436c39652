//! Deterministic per-particle random streams.
//!
//! Every draw made for particle `j` at time `t` comes from a ChaCha8 stream
//! keyed by `(seed, t, j)`, so the order in which particles are processed
//! (sequentially or across rayon workers) never changes the output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream slot reserved for the resampling draw of a time step.
pub const RESAMPLE_SLOT: u32 = u32::MAX;

pub type StreamRng = ChaCha8Rng;

/// Identifier of the stream used by particle `slot` at time `t` (1-based).
pub fn stream_id(t: usize, slot: u32) -> u64 {
    ((t as u64) << 32) | slot as u64
}

/// Opens the stream for `(seed, t, slot)`.
pub fn stream(seed: u64, t: usize, slot: u32) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(t, slot));
    rng
}
