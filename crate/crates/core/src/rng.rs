//! Independent random streams derived from a master seed.
//!
//! Stream `i` of seed `s` is ChaCha8 keyed by `s` with stream id `i`, so a
//! replica's draws do not depend on which thread runs it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const JITTER_SALT: u64 = 0x6a09_e667_f3bc_c908;
const ORACLE_SALT: u64 = 0xbb67_ae85_84ca_a73b;

/// Stream for walk replica `index`.
pub fn replica_rng(seed: u64, index: u64) -> ChaCha8Rng {
    stream(seed, index)
}

/// `U(-1/2, 1/2)` jitter for one `(replica, step, prime)` cell. The value
/// depends on nothing else, so every analysis sees the same jitter.
pub fn jitter_value(seed: u64, replica: u64, step: u64, prime: u64) -> f64 {
    let key = splitmix64(splitmix64(step ^ JITTER_SALT) ^ prime);
    let mut rng = stream(seed ^ key, replica);
    rng.random::<f64>() - 0.5
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for oracle sample `index`.
pub fn oracle_rng(seed: u64, index: u64) -> ChaCha8Rng {
    stream(seed ^ ORACLE_SALT, index)
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
