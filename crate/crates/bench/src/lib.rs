//! Shared instance builders for the benchmark targets.

use gradmix_core::rng::Rng;
use gradmix_core::types::{GradientSet, LossVector};

pub fn random_vectors(seed: u64, k: usize, d: usize) -> Vec<Vec<f64>> {
    let mut rng = Rng::new(seed);
    (0..k)
        .map(|_| (0..d).map(|_| rng.normal()).collect())
        .collect()
}

pub fn random_gradient_set(seed: u64, k: usize, d: usize) -> GradientSet {
    let grads = random_vectors(seed, k, d);
    let mut rng = Rng::new(seed ^ 0x5EED);
    let losses = LossVector::new((0..k).map(|_| 0.1 + rng.uniform() * 3.0).collect()).unwrap();
    GradientSet::new(grads, losses).unwrap()
}
