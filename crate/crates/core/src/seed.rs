//! Deterministic seed derivation and the crate's random number generator.
//!
//! Child seeds are a hash of the master seed and the task coordinates, so the
//! stream a task sees depends only on what the task is, never on which worker
//! runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a coordinate tuple.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &c in coords {
        h = splitmix64(h ^ splitmix64(c.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for a task identified by `coords` under `master`.
pub fn task_rng(master: u64, coords: &[u64]) -> Rng {
    rng_from_seed(derive_seed(master, coords))
}

/// Bit pattern of a float, for use as a seed coordinate.
pub fn coord_f64(x: f64) -> u64 {
    x.to_bits()
}
