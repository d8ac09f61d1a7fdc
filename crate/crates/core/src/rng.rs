//! Seeded random streams.
//!
//! Every stochastic routine takes its stream explicitly. Work that is split
//! into independent units (transition rows, simulation trials) derives one
//! sub-stream per unit from the run seed and the unit's coordinates, so the
//! result does not depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sub-stream keyed by `seed` and a coordinate path.
pub fn substream(seed: u64, coords: &[u64]) -> Stream {
    let mut key = splitmix(seed);
    for &c in coords {
        key = splitmix(key ^ splitmix(c.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    ChaCha8Rng::seed_from_u64(key)
}

/// Seed for a named unit of work, e.g. `"transitions/Els"`.
pub fn derive(seed: u64, label: &str) -> u64 {
    label.bytes().fold(splitmix(seed), |k, b| splitmix(k ^ u64::from(b)))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
