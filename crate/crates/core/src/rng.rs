//! The one random generator used by every sampling path.
//!
//! `ChaCha8Rng` seeded through `SeedableRng::seed_from_u64`. Uniform reals come
//! from `Rng::gen::<f64>()` (53 random mantissa bits in `[0, 1)`). Golden tests
//! encode outputs of exactly this construction, so changing either piece is a
//! breaking change.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
