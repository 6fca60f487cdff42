//! Shared workload generators for the benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use udcdma::channel::{noise_std, transmit};
use udcdma::CodeSet;

/// `n` received vectors for uniform random ±1 inputs at the given E_b/N0 (amplitude 1).
pub fn observations(c: &CodeSet, ebn0_db: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = noise_std(ebn0_db, 1.0, c.l(), c.k());
    (0..n)
        .map(|_| {
            let x: Vec<i8> = (0..c.k()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            transmit(&x, c, 1.0, std, &mut rng)
        })
        .collect()
}

/// Noiseless affine observations `r = (C·x + C·1)/2` for the recursive decoder.
pub fn noiseless_receptions(c: &CodeSet, n: usize, seed: u64) -> Vec<Vec<i32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x: Vec<i32> = (0..c.k()).map(|_| rng.random::<bool>() as i32).collect();
            c.mul(&x)
        })
        .collect()
}
