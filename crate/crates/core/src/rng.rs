//! Seeded random streams.
//!
//! A run owns one root seed. Every concern that consumes randomness draws from
//! its own ChaCha stream, so enabling or reconfiguring one feature never shifts
//! the draws seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named substreams derived from a root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    BsPlacement = 1,
    UePlacement = 2,
    Fading = 3,
    Selection = 4,
    Contention = 5,
    Estimation = 6,
    InitialPower = 7,
    RandomPower = 8,
}

/// Returns the generator for `stream` under `seed`.
pub fn substream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Plain seeded generator for tests and one-off sampling.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
