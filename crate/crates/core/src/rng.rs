//! Seedable random source.
//!
//! Backed by ChaCha8. Monte Carlo replications each get their own ChaCha
//! stream under a shared master seed, so replication `i` sees the same draws
//! no matter how many replications run or in which order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream `index` under `master_seed`.
    pub fn for_replication(master_seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        RandomSource { rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Gamma with the given shape and rate (mean `shape / rate`).
    pub fn gamma(&mut self, shape: f64, rate: f64) -> f64 {
        Gamma::new(shape, 1.0 / rate)
            .expect("gamma shape and rate must be positive")
            .sample(&mut self.rng)
    }

    pub fn poisson(&mut self, lambda: f64) -> u64 {
        if lambda <= 0.0 {
            return 0;
        }
        let k: f64 = Poisson::new(lambda)
            .expect("poisson mean must be finite")
            .sample(&mut self.rng);
        k as u64
    }

    pub fn chi_squared(&mut self, df: f64) -> f64 {
        self.gamma(0.5 * df, 0.5)
    }

    /// Noncentral chi-squared as a Poisson mixture of central ones:
    /// `K ~ Poisson(λ/2)`, then `χ²_{df + 2K}`. Exact for every `df > 0`.
    pub fn noncentral_chi_squared(&mut self, df: f64, noncentrality: f64) -> f64 {
        let k = self.poisson(0.5 * noncentrality);
        self.chi_squared(df + 2.0 * k as f64)
    }
}
