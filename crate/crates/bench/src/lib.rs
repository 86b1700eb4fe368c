//! Seeded inputs shared by the benchmarks.

use poisson_groupoid::{DualGroupPoint, GroupPoint, PoissonDouble, Su11Model};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `count` random `(g, gamma)` pairs of the `SU(1,1)` model.
pub fn su11_pairs(m: &Su11Model, seed: u64, count: usize) -> Vec<(GroupPoint, DualGroupPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (m.g_sample(&mut rng), m.gstar_sample(&mut rng))).collect()
}
