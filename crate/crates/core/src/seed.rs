//! Stage-seed derivation. A single run seed is fanned out by stage name so
//! that every stochastic stage (init, shuffling, dropout, special rows) draws
//! from its own reproducible stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives a 64-bit seed for `stage` from the run seed (FNV-1a over the
/// stage name mixed with the seed, finalised with splitmix64).
pub fn stage_seed(seed: u64, stage: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in stage.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(h ^ seed.rotate_left(32))
}

pub fn stage_rng(seed: u64, stage: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stage_seed(seed, stage))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
