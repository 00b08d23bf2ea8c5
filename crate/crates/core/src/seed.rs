//! Seed lineage for reproducible parallel work.
//!
//! Every unit of work (a replication, a pair split) gets its own generator
//! whose seed is a pure function of the base seed and the unit's coordinates,
//! so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the crate. ChaCha is portable across
/// platforms and `rand` releases.
pub type WorkerRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a sequence of coordinates.
pub fn derive_seed(base: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix(base), |acc, &c| splitmix(acc ^ splitmix(c)))
}

pub fn rng_for(base: u64, coords: &[u64]) -> WorkerRng {
    WorkerRng::seed_from_u64(derive_seed(base, coords))
}
