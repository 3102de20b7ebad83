//! Deterministic RNG streams.
//!
//! Every stochastic routine takes a master seed and derives one ChaCha
//! stream per unit of work (repetition, calibration pair, generator), so
//! results do not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keep different consumers of the same master seed apart.
pub mod tag {
    pub const CALIBRATION: u64 = 0x01;
    pub const SHUFFLE: u64 = 0x02;
    pub const INDEPENDENCE: u64 = 0x03;
    pub const GENERATOR: u64 = 0x04;
    pub const PMF_PRESET: u64 = 0x05;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a list of integers into a single stream identifier.
pub fn stream_id(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6A09_E667_F3BC_C908, |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

/// RNG for the stream `parts` under `seed`.
pub fn stream_rng(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(parts));
    rng
}
