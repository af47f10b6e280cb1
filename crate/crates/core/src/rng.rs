//! Seeded, reproducible randomness.
//!
//! Backed by ChaCha8. `SeededRng::new(seed)` reads stream 0 of the key derived
//! from `seed`; `fork(stream)` opens an independent stream under the same key,
//! so sub-components can draw without perturbing each other's sequences.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::vector::Vector;

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// An independent generator on `stream`. Stream 0 equals `new(seed)`.
    pub fn fork(&self, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(stream);
        SeededRng {
            seed: self.seed,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.inner.random::<bool>()
    }

    pub fn gaussian(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn gaussian_vector(&mut self, dim: usize) -> Vector {
        Vector::new((0..dim).map(|_| self.gaussian()).collect()).expect("gaussian draws are finite")
    }

    /// Uniform on the unit sphere.
    pub fn unit_sphere_vector(&mut self, dim: usize) -> Vector {
        loop {
            let g = self.gaussian_vector(dim);
            let n = g.norm();
            if n > 1e-12 {
                return g.scaled(1.0 / n);
            }
        }
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
