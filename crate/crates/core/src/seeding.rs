//! Per-trajectory random streams.
//!
//! Trajectory `i` of a run with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(mix(s, i))` with the ChaCha stream id set to the
//! role. Distinct roles therefore never share a keystream, and changing one
//! rate (say `p`) leaves the draws of the other roles untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[repr(u64)]
pub enum Role {
    Gates = 0,
    Hadamard = 1,
    Junk = 2,
    Erasure = 3,
    Lattice = 4,
    LatticeInit = 5,
    Bootstrap = 6,
    Restart = 7,
}

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `index` under `master`.
pub fn mix(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn stream(master: u64, index: u64, role: Role) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(master, index));
    rng.set_stream(role as u64);
    rng
}
