//! Seeded, splittable random streams.
//!
//! Every stochastic component takes its own `StateRng` built from a seed
//! derived from a master seed and a path of stream identifiers, so parallel
//! workers never share a generator and every result can be replayed from the
//! seed it records.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::qmatrix::CVector;

pub type StateRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for the stream at `path` below `master`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &id| {
        splitmix64(acc ^ splitmix64(id))
    })
}

pub fn rng_from_seed(seed: u64) -> StateRng {
    StateRng::seed_from_u64(seed)
}

/// Haar-random unit vector: i.i.d. complex Gaussian entries, normalized.
pub fn random_unit_vector(dim: usize, rng: &mut StateRng) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        });
        let norm = v.norm();
        if norm > 1e-300 {
            return v.unscale(norm);
        }
    }
}
