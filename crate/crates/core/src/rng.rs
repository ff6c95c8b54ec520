//! The single random number generator used by every simulation.
//!
//! All randomness comes from [`SimRng`], ChaCha with 8 rounds as implemented
//! by `rand_chacha` 0.3. Its output stream for a given seed is fixed by that
//! crate's stability guarantee, so results are reproducible across platforms.
//! Per-trial seeds are derived with [`trial_seed`], a SplitMix64 mix of the
//! base seed, the x-axis point, and the trial index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name and version of the generator, recorded in experiment metadata.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.3), seed_from_u64";

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one trial of one x-axis point of an experiment.
pub fn trial_seed(base: u64, x: f64, trial: u64) -> u64 {
    let h = splitmix64(base);
    let h = splitmix64(h ^ x.to_bits());
    splitmix64(h ^ trial)
}
