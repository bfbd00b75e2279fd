//! Monte Carlo estimators built on Poisson jump counts.
//!
//! Both estimators split the `M` samples into [`batch::BATCHES`] contiguous
//! batches. Batch `b` draws from [`RngStream`] `(seed, b)` and records integer
//! event counts; amplitudes are formed from the counts afterwards. The worker
//! count therefore only decides which thread runs which batch: the output is
//! bitwise identical for any number of workers.

pub mod batch;
mod continuous;
mod discrete;
pub mod rng;
pub mod trajectory;

use std::fmt;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;

use crate::coin::CoinSpec;
use crate::error::{Result, WalkError};
use crate::state::{CoinedState, ScalarState};

pub use continuous::estimate_continuous;
pub use discrete::{estimate_discrete, estimate_sigma2};
pub use rng::{sample_poisson, PoissonSampler, RngStream};
pub use trajectory::{sample_trajectory, TrajectorySample};

/// `e^{weight exponent}` limit beyond which estimators refuse to run.
pub const MAX_WEIGHT_EXPONENT: f64 = 30.0;
/// Predicted relative noise `e^{weight exponent}/√M` above which a run is flagged.
pub const ADVISORY_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64, workers: usize) -> Self {
        McConfig {
            samples,
            seed,
            workers,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(WalkError::InvalidArgument(
                "at least one sample is required".into(),
            ));
        }
        if self.workers == 0 {
            return Err(WalkError::InvalidArgument(
                "at least one worker is required".into(),
            ));
        }
        Ok(())
    }
}

/// Non-fatal warning: the per-sample weight is large relative to `√M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceAdvisory {
    /// Magnitude of the exponential weight, `e^{nλ₂}` or `e^{λt}`.
    pub weight: f64,
    pub samples: u64,
    /// `weight / √samples`.
    pub predicted_noise: f64,
}

impl VarianceAdvisory {
    fn check(weight: f64, samples: u64) -> Option<Self> {
        let predicted_noise = weight / (samples as f64).sqrt();
        (predicted_noise > ADVISORY_THRESHOLD).then_some(VarianceAdvisory {
            weight,
            samples,
            predicted_noise,
        })
    }
}

impl fmt::Display for VarianceAdvisory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "estimate likely too noisy: weight {:.3e} over sqrt({}) samples gives {:.3e} > {}",
            self.weight, self.samples, self.predicted_noise, ADVISORY_THRESHOLD
        )
    }
}

/// Parameters a report was produced with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coin: Option<CoinSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    pub seed: u64,
    pub workers: usize,
    pub batches: usize,
    /// Each trajectory feeds both coin sectors, so their errors are correlated.
    pub sectors_share_samples: bool,
}

/// Estimated coined state with per-amplitude standard errors.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub estimate: CoinedState,
    /// Standard error of `|Ψ(x, +1)|` estimates, aligned with the estimate window.
    pub std_err_plus: Vec<f64>,
    pub std_err_minus: Vec<f64>,
    /// Standard error of the probability `|Ψ(x,+1)|² + |Ψ(x,−1)|²`.
    pub std_err_probability: Vec<f64>,
    pub samples: u64,
    pub wall_time: Duration,
    pub config: RunEcho,
    pub advisory: Option<VarianceAdvisory>,
}

impl EstimateReport {
    fn index(&self, x: i64) -> Option<usize> {
        let i = x - self.estimate.x_min();
        (i >= 0 && (i as usize) < self.std_err_plus.len()).then_some(i as usize)
    }

    pub fn std_err(&self, x: i64, y: i8) -> f64 {
        match self.index(x) {
            Some(i) if y > 0 => self.std_err_plus[i],
            Some(i) => self.std_err_minus[i],
            None => 0.0,
        }
    }

    /// Standard error of the probability at `x`; see [`batch::probability_std_err`].
    pub fn probability_std_err(&self, x: i64) -> f64 {
        self.index(x).map_or(0.0, |i| self.std_err_probability[i])
    }
}

/// Estimated scalar state with per-amplitude standard errors.
#[derive(Debug, Clone)]
pub struct ScalarEstimateReport {
    pub estimate: ScalarState,
    pub std_err: Vec<f64>,
    pub std_err_probability: Vec<f64>,
    pub samples: u64,
    pub wall_time: Duration,
    pub config: RunEcho,
    pub advisory: Option<VarianceAdvisory>,
}

impl ScalarEstimateReport {
    fn index(&self, x: i64) -> Option<usize> {
        let i = x - self.estimate.x_min();
        (i >= 0 && (i as usize) < self.std_err.len()).then_some(i as usize)
    }

    pub fn std_err_at(&self, x: i64) -> f64 {
        self.index(x).map_or(0.0, |i| self.std_err[i])
    }

    pub fn probability_std_err(&self, x: i64) -> f64 {
        self.index(x).map_or(0.0, |i| self.std_err_probability[i])
    }
}

/// Runs `job(batch_index, batch_size)` for every batch on `workers` threads,
/// returning results in batch order.
fn run_batches<T, F>(cfg: &McConfig, job: F) -> Result<(Vec<T>, Vec<u64>)>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync,
{
    let sizes = batch::partition(cfg.samples);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| WalkError::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let results = pool.install(|| {
        sizes
            .par_iter()
            .enumerate()
            .map(|(b, &size)| job(b as u64, size))
            .collect()
    });
    Ok((results, sizes))
}
