//! Estimator for the continuous-time walk `e^{iλPt}`.
//!
//! `Ψ(t, x) = e^{λt} E_x[i^{N_t} Ψ₀(X_t)]` where `N_t ~ Poisson(λt)` counts the
//! jumps of the simple symmetric walk `X`. The walk is symmetric, so
//! `P_x(X_k = s) = P_s(X_k = x)`: each sample draws one jump count and one
//! displacement `D` and scatters `e^{λt} i^{N_t} Ψ₀(s)` onto `s + D` for every
//! site `s` in the support of `Ψ₀`.

use std::time::Instant;

use num_complex::Complex64;

use super::batch::{batch_means, probability_std_err};
use super::rng::{PoissonSampler, RngStream};
use super::{
    run_batches, McConfig, RunEcho, ScalarEstimateReport, VarianceAdvisory, MAX_WEIGHT_EXPONENT,
};
use crate::error::{Result, WalkError};
use crate::reference::{GeneratorKind, LatticeGenerator};
use crate::series::i_pow;
use crate::state::ScalarState;

/// Net displacement of `jumps` fair ±1 steps.
#[inline]
fn displacement(jumps: u64, rng: &mut RngStream) -> i64 {
    let mut ups = 0u64;
    let mut left = jumps;
    while left > 0 {
        let take = left.min(64);
        let bits = rng.next_u64();
        let mask = if take == 64 {
            u64::MAX
        } else {
            (1u64 << take) - 1
        };
        ups += (bits & mask).count_ones() as u64;
        left -= take;
    }
    2 * ups as i64 - jumps as i64
}

/// `counts[D + reach][N mod 4]`, grown on demand.
struct DisplacementCounts {
    reach: i64,
    counts: Vec<[u64; 4]>,
}

impl DisplacementCounts {
    fn new(reach: i64) -> Self {
        DisplacementCounts {
            reach,
            counts: vec![[0; 4]; (2 * reach + 1) as usize],
        }
    }

    fn record(&mut self, d: i64, jumps: u64) {
        if d.abs() > self.reach {
            let grown = d.abs();
            let mut counts = vec![[0; 4]; (2 * grown + 1) as usize];
            let shift = (grown - self.reach) as usize;
            counts[shift..shift + self.counts.len()].copy_from_slice(&self.counts);
            self.counts = counts;
            self.reach = grown;
        }
        self.counts[(d + self.reach) as usize][(jumps & 3) as usize] += 1;
    }

    fn get(&self, d: i64) -> [u64; 4] {
        if d.abs() > self.reach {
            [0; 4]
        } else {
            self.counts[(d + self.reach) as usize]
        }
    }

    /// Largest |D| actually observed.
    fn observed_reach(&self) -> i64 {
        (0..=self.reach)
            .rev()
            .find(|&d| self.get(d) != [0; 4] || self.get(-d) != [0; 4])
            .unwrap_or(0)
    }
}

/// Estimates `e^{iλPt}·init` with `cfg.samples` jump-count samples.
pub fn estimate_continuous(
    gen: &LatticeGenerator,
    init: &ScalarState,
    t: f64,
    cfg: &McConfig,
) -> Result<ScalarEstimateReport> {
    cfg.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(WalkError::InvalidArgument(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    let started = Instant::now();
    let echo = RunEcho {
        coin: None,
        steps: None,
        rate: Some(gen.lambda),
        time: Some(t),
        seed: cfg.seed,
        workers: cfg.workers,
        batches: super::batch::partition(cfg.samples).len(),
        sectors_share_samples: false,
    };
    if t == 0.0 {
        return Ok(ScalarEstimateReport {
            estimate: init.clone(),
            std_err: vec![0.0; init.len()],
            std_err_probability: vec![0.0; init.len()],
            samples: cfg.samples,
            wall_time: started.elapsed(),
            config: echo,
            advisory: None,
        });
    }
    match gen.kind {
        GeneratorKind::SimpleSymmetricWalk => {}
    }

    let exponent = gen.lambda * t;
    if exponent > MAX_WEIGHT_EXPONENT {
        return Err(WalkError::WeightOverflow {
            exponent,
            limit: MAX_WEIGHT_EXPONENT,
        });
    }
    let sampler = PoissonSampler::new(exponent)?;
    let initial_reach = (exponent + 10.0 * exponent.sqrt()).ceil() as i64 + 1;

    let (batch_counts, sizes) = run_batches(cfg, |b, size| {
        let mut rng = RngStream::new(cfg.seed, b);
        let mut counts = DisplacementCounts::new(initial_reach);
        for _ in 0..size {
            let jumps = sampler.sample(&mut rng);
            let d = displacement(jumps, &mut rng);
            counts.record(d, jumps);
        }
        counts
    })?;

    let reach = batch_counts
        .iter()
        .map(DisplacementCounts::observed_reach)
        .max()
        .unwrap_or(0);
    let x_min = init.x_min() - reach;
    let x_max = init.x_max() + reach;
    let width = (x_max - x_min + 1) as usize;
    let scale = exponent.exp();
    let phases: [Complex64; 4] = std::array::from_fn(|r| i_pow(r as i64) * scale);
    let support: Vec<(i64, Complex64)> = init
        .sites()
        .filter(|(_, a)| *a != Complex64::new(0.0, 0.0))
        .collect();

    let sums: Vec<Vec<Complex64>> = batch_counts
        .iter()
        .map(|counts| {
            let mut s = vec![Complex64::new(0.0, 0.0); width];
            for (i, slot) in s.iter_mut().enumerate() {
                let x = x_min + i as i64;
                for &(source, amp) in &support {
                    let row = counts.get(x - source);
                    for r in 0..4 {
                        if row[r] != 0 {
                            *slot += phases[r] * amp * row[r] as f64;
                        }
                    }
                }
            }
            s
        })
        .collect();

    let (mean, err) = batch_means(&sums, &sizes);
    let groups: Vec<Vec<usize>> = (0..width).map(|i| vec![i]).collect();
    let std_err_probability = probability_std_err(&sums, &sizes, &mean, &err, &groups);
    Ok(ScalarEstimateReport {
        estimate: ScalarState::from_amplitudes(x_min, mean)?,
        std_err: err,
        std_err_probability,
        samples: cfg.samples,
        wall_time: started.elapsed(),
        config: echo,
        advisory: VarianceAdvisory::check(scale, cfg.samples),
    })
}
