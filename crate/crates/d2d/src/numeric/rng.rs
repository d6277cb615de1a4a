//! Seeded random number generation.
//!
//! Everything stochastic in the crate (weight init, dropout, latent noise,
//! shuffles, synthetic data) flows through [`SeededRng`] so that a run is
//! fully reproducible from its seed. The generator is ChaCha8, whose output
//! stream is stable across platforms and library versions.

use crate::numeric::Matrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    rng: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent generator for a named sub-stream, so that
    /// e.g. weight init and minibatch shuffling cannot perturb each other.
    pub fn fork(&self, stream: u64) -> SeededRng {
        // splitmix64 of (seed, stream) keeps forks well separated.
        let mut z = self
            .seed
            .wrapping_add(0x9e37_79b9_7f4a_7c15_u64.wrapping_mul(stream.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        SeededRng::new(z ^ (z >> 31))
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Matrix of i.i.d. standard normal draws, filled row-major.
    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for v in m.data_mut() {
            *v = self.rng.sample(StandardNormal);
        }
        m
    }

    pub fn uniform_01(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform draw in `[-limit, limit]`.
    pub fn uniform_symmetric(&mut self, limit: f64) -> f64 {
        (self.rng.random::<f64>() * 2.0 - 1.0) * limit
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }

    pub fn random_range(&mut self, upper: usize) -> usize {
        self.rng.random_range(0..upper)
    }
}
