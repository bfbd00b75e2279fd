//! Random streams and Poisson sampling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, WalkError};

/// Exclusive upper limit on Poisson rates accepted by the inversion sampler.
pub const MAX_POISSON_RATE: f64 = 20.0;

/// A reproducible random stream keyed by `(seed, stream_id)`.
///
/// Backed by ChaCha8, whose 64-bit stream selector gives independent
/// sequences for distinct `stream_id`s under the same seed. The estimators use
/// one stream per sample batch, so results do not depend on how batches are
/// spread over threads.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// Poisson sampler by sequential-search inversion of the CDF.
#[derive(Debug, Clone, Copy)]
pub struct PoissonSampler {
    lambda: f64,
    p0: f64,
}

impl PoissonSampler {
    /// Cut-off for the search; `P(N > 1000)` is far below `f64` resolution for λ < 20.
    const SEARCH_CAP: u64 = 1000;

    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < MAX_POISSON_RATE) {
            return Err(WalkError::RateOutOfRange(lambda));
        }
        Ok(PoissonSampler {
            lambda,
            p0: (-lambda).exp(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> u64 {
        let u = rng.uniform();
        let mut k = 0;
        let mut p = self.p0;
        let mut cdf = p;
        while u >= cdf && k < Self::SEARCH_CAP {
            k += 1;
            p *= self.lambda / k as f64;
            cdf += p;
        }
        k
    }
}

/// One Poisson(λ) draw; validates `0 < λ < 20` on every call.
pub fn sample_poisson(lambda: f64, rng: &mut RngStream) -> Result<u64> {
    Ok(PoissonSampler::new(lambda)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn moments(lambda: f64, draws: usize, seed: u64) -> (f64, f64) {
        let sampler = PoissonSampler::new(lambda).unwrap();
        let mut rng = RngStream::new(seed, 0);
        let values: Vec<f64> = (0..draws)
            .map(|_| sampler.sample(&mut rng) as f64)
            .collect();
        let mean = values.iter().sum::<f64>() / draws as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        (mean, var)
    }

    #[test]
    fn poisson_mean() {
        let draws = 1_000_000;
        let (mean, _) = moments(FRAC_PI_4, draws, 1);
        assert!((mean - FRAC_PI_4).abs() <= 3.0 * (FRAC_PI_4 / draws as f64).sqrt());
    }

    #[test]
    fn poisson_variance() {
        let draws = 1_000_000;
        let lambda = FRAC_PI_4;
        let (_, var) = moments(lambda, draws, 2);
        // Var of the sample variance for Poisson: (μ₄ − σ⁴)/N with μ₄ = λ + 3λ².
        let se = ((lambda + 3.0 * lambda * lambda - lambda * lambda) / draws as f64).sqrt();
        assert!((var - lambda).abs() <= 4.0 * se, "var {var}, se {se}");
    }

    #[test]
    fn poisson_larger_rate() {
        let (mean, var) = moments(12.5, 200_000, 3);
        assert!((mean - 12.5).abs() < 4.0 * (12.5f64 / 200_000.0).sqrt());
        assert!((var - 12.5).abs() < 0.3);
    }

    #[test]
    fn poisson_rate_range() {
        let mut rng = RngStream::new(0, 0);
        for bad in [0.0, -1.0, 20.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                sample_poisson(bad, &mut rng),
                Err(WalkError::RateOutOfRange(_))
            ));
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let draw = |seed, stream| {
            let mut rng = RngStream::new(seed, stream);
            (0..32)
                .map(|_| sample_poisson(FRAC_PI_4, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(42, 0), draw(42, 0));
        assert_ne!(draw(42, 0), draw(42, 1));
        assert_ne!(draw(42, 0), draw(43, 0));
    }

    #[test]
    fn distinct_streams_are_uncorrelated() {
        let n = 200_000;
        let mut a = RngStream::new(9, 0);
        let mut b = RngStream::new(9, 1);
        let mut cov = 0.0;
        for _ in 0..n {
            cov += (a.uniform() - 0.5) * (b.uniform() - 0.5);
        }
        cov /= n as f64;
        // Var(U) = 1/12, so the correlation estimate has standard error 1/√n.
        assert!((cov * 12.0).abs() < 4.0 / (n as f64).sqrt());
    }
}
