//! Seeded random sub-streams.
//!
//! Every random quantity in a drop is drawn from a ChaCha stream selected by
//! `(seed, purpose, index)`, so a run is reproducible regardless of the order
//! in which independent parts of it are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a sub-stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Drop = 1,
    Shadowing = 2,
    DlFading = 3,
    UlFading = 4,
    Harq = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    rng.set_stream(splitmix64((purpose as u64) << 56 ^ index));
    rng
}
