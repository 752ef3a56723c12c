//! Deterministic random streams.
//!
//! Every frame draws from its own ChaCha stream keyed by the master seed and
//! selected by `(cell, frame)`, so results do not depend on how frames are
//! scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const FRAME_BITS: u32 = 40;

/// Stream for frame `frame` of sweep cell `cell`.
pub fn frame_stream(master_seed: u64, cell: u64, frame: u64) -> SimRng {
    debug_assert!(frame < 1 << FRAME_BITS && cell < 1 << (64 - FRAME_BITS));
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((cell << FRAME_BITS) | frame);
    rng
}

/// Generic seeded stream for non-frame uses (interleavers, tests).
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
