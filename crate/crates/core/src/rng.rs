//! Seed derivation.
//!
//! Every stochastic quantity is a pure function of a `u64` seed. A run seed
//! is split into sub-seeds with [`derive_seed`]; a single drop seed is split
//! into independent ChaCha streams with [`stream`]:
//!
//! | stream | consumer |
//! |--------|----------|
//! | [`USERS`] | GUE and UAV positions |
//! | [`CHANNEL`] | LoS states, shadow fading, small-scale fading |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const USERS: u64 = 0;
pub const CHANNEL: u64 = 1;

/// Independent stream `id` of the generator seeded by `seed`.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for item `index` of purpose `tag` under `base`.
pub fn derive_seed(base: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ tag.wrapping_mul(0xD1B5_4A32_D192_ED03)) ^ index)
}
