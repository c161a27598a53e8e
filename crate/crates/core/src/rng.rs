//! Seeded random streams. Every stochastic routine takes its generator
//! explicitly; parallel work forks one stream per task index so results do
//! not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` of the generator family identified by `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a child seed from a parent generator, for handing to forked streams.
pub fn child_seed(rng: &mut Rng) -> u64 {
    use rand::RngCore;
    rng.next_u64()
}
