//! Estimator for the coined walk with a general coin.
//!
//! With `N₁, …, Nₙ` i.i.d. Poisson(λ₂), `Sⱼ = N₁ + … + Nⱼ` and the point-mass
//! initial state, the amplitude is
//!
//! ```text
//! Ψₙ(x, y) = e^{inδ} e^{nλ₂} E[ i^{Sₙ − y(1−(−1)^{Sₙ})/2} e^{iλ₁x} e^{iλ₃(x − y + y(−1)^{Sₙ})} Ψ₀(Xₙ, Yₙ) ]
//! ```
//!
//! with `Yₙ = (−1)^{Sₙ} y` and `Xₙ = x − y Σ_{j<n} (−1)^{Sⱼ}`. `Ψ₀` vanishes
//! unless `Xₙ = 0`, so one trajectory contributes to exactly one site per coin
//! sector: `x = L` for `y = +1` and `x = −L` for `y = −1`, where `L` is the
//! trajectory's landing sum. Every trajectory is used for both sectors.

use std::f64::consts::TAU;
use std::time::Instant;

use num_complex::Complex64;

use super::batch::{batch_means, probability_std_err};
use super::rng::{PoissonSampler, RngStream};
use super::trajectory::draw_landing;
use super::{
    run_batches, EstimateReport, McConfig, RunEcho, VarianceAdvisory, MAX_WEIGHT_EXPONENT,
};
use crate::coin::CoinSpec;
use crate::error::{Result, WalkError};
use crate::series::i_pow;
use crate::state::{CoinedState, PointMassInitialState};

/// Weight of one sample in sector `y` with landing sum `landing` and `Sₙ ≡ r (mod 4)`.
fn sample_weight(
    spec: &CoinSpec,
    init: &PointMassInitialState,
    n: usize,
    y: i8,
    landing: i64,
    r: u64,
) -> Complex64 {
    let y_i = y as i64;
    let x = y_i * landing;
    let odd = (r & 1) as i64;
    let final_coin = if odd == 1 { -y } else { y };
    let scale = (n as f64 * spec.lambda2).exp();
    let phase = Complex64::cis(
        n as f64 * spec.delta
            + spec.lambda1 * x as f64
            + spec.lambda3 * (x - y_i + final_coin as i64) as f64,
    );
    i_pow(r as i64 - y_i * odd) * phase * scale * init.coefficient(final_coin)
}

/// Estimates `Ψₙ` for the coin described by `spec` from the point mass `init`.
///
/// Returns `init` itself for `n = 0`. The per-sample weight has modulus up to
/// `e^{nλ₂}`, so the relative noise grows like `e^{nλ₂}/√M`; runs where that
/// ratio exceeds `0.05` carry a [`VarianceAdvisory`].
pub fn estimate_discrete(
    spec: &CoinSpec,
    init: &PointMassInitialState,
    n: usize,
    cfg: &McConfig,
) -> Result<EstimateReport> {
    cfg.validate()?;
    let started = Instant::now();
    let echo = RunEcho {
        coin: Some(*spec),
        steps: Some(n),
        rate: None,
        time: None,
        seed: cfg.seed,
        workers: cfg.workers,
        batches: super::batch::partition(cfg.samples).len(),
        sectors_share_samples: true,
    };

    if n == 0 {
        return Ok(EstimateReport {
            estimate: init.to_state(),
            std_err_plus: vec![0.0],
            std_err_minus: vec![0.0],
            std_err_probability: vec![0.0],
            samples: cfg.samples,
            wall_time: started.elapsed(),
            config: echo,
            advisory: None,
        });
    }

    if !(spec.lambda2 > 0.0 && spec.lambda2 < TAU) {
        return Err(WalkError::RateOutOfRange(spec.lambda2));
    }
    let exponent = n as f64 * spec.lambda2;
    if exponent > MAX_WEIGHT_EXPONENT {
        return Err(WalkError::WeightOverflow {
            exponent,
            limit: MAX_WEIGHT_EXPONENT,
        });
    }
    let sampler = PoissonSampler::new(spec.lambda2)?;
    let reach = n as i64;
    let width = 2 * n + 1;

    // counts[L + n][Sₙ mod 4]
    let (batch_counts, sizes) = run_batches(cfg, |b, size| {
        let mut rng = RngStream::new(cfg.seed, b);
        let mut counts = vec![[0u64; 4]; width];
        for _ in 0..size {
            let (landing, total) = draw_landing(n, &sampler, &mut rng);
            counts[(landing + reach) as usize][(total & 3) as usize] += 1;
        }
        counts
    })?;

    // Sector weights, laid out as [plus sites..., minus sites...] by site x.
    let mut weights = vec![[Complex64::new(0.0, 0.0); 4]; width];
    for (li, row) in weights.iter_mut().enumerate() {
        for (r, w) in row.iter_mut().enumerate() {
            *w = sample_weight(spec, init, n, 1, li as i64 - reach, r as u64);
        }
    }
    let mut weights_minus = vec![[Complex64::new(0.0, 0.0); 4]; width];
    for (li, row) in weights_minus.iter_mut().enumerate() {
        for (r, w) in row.iter_mut().enumerate() {
            *w = sample_weight(spec, init, n, -1, li as i64 - reach, r as u64);
        }
    }

    let sums: Vec<Vec<Complex64>> = batch_counts
        .iter()
        .map(|counts| {
            let mut s = vec![Complex64::new(0.0, 0.0); 2 * width];
            for (li, row) in counts.iter().enumerate() {
                let landing = li as i64 - reach;
                let plus_site = (landing + reach) as usize;
                let minus_site = (-landing + reach) as usize;
                for r in 0..4 {
                    if row[r] == 0 {
                        continue;
                    }
                    let c = row[r] as f64;
                    s[plus_site] += weights[li][r] * c;
                    s[width + minus_site] += weights_minus[li][r] * c;
                }
            }
            s
        })
        .collect();

    let (mean, err) = batch_means(&sums, &sizes);
    let groups: Vec<Vec<usize>> = (0..width).map(|i| vec![i, width + i]).collect();
    let std_err_probability = probability_std_err(&sums, &sizes, &mean, &err, &groups);
    let estimate =
        CoinedState::from_amplitudes(-reach, mean[..width].to_vec(), mean[width..].to_vec())?;

    Ok(EstimateReport {
        estimate,
        std_err_plus: err[..width].to_vec(),
        std_err_minus: err[width..].to_vec(),
        std_err_probability,
        samples: cfg.samples,
        wall_time: started.elapsed(),
        config: echo,
        advisory: VarianceAdvisory::check(exponent.exp(), cfg.samples),
    })
}

/// Estimator for the pure `e^{iλσ₂}` coin.
pub fn estimate_sigma2(
    lambda: f64,
    init: &PointMassInitialState,
    n: usize,
    cfg: &McConfig,
) -> Result<EstimateReport> {
    estimate_discrete(&CoinSpec::new(0.0, 0.0, lambda, 0.0), init, n, cfg)
}
