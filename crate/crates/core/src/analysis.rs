//! Comparing estimates against references.

use num_complex::Complex64;
use serde::Serialize;

use crate::coin::CoinSpec;
use crate::error::{Result, WalkError};
use crate::mc::{estimate_discrete, McConfig};
use crate::reference::evolve_coined;
use crate::state::{CoinedState, PointMassInitialState, PositionDistribution};

const MASS_TOL: f64 = 1e-6;

/// Total variation `½ Σ_x |p(x) − q(x)|` between two probability distributions.
///
/// Both inputs must be non-negative with unit mass to within `1e-6`; they are
/// rescaled to exact unit mass before comparing. Distributions with larger
/// mass defects (Monte Carlo estimates) should go through
/// [`PositionDistribution::normalized`] first.
pub fn total_variation(p: &PositionDistribution, q: &PositionDistribution) -> Result<f64> {
    for (name, d) in [("p", p), ("q", q)] {
        if let Some((x, v)) = d.iter().find(|(_, v)| !(*v >= 0.0)) {
            return Err(WalkError::NotADistribution(format!("{name}({x}) = {v}")));
        }
        let mass = d.mass();
        if !((mass - 1.0).abs() <= MASS_TOL) {
            return Err(WalkError::NotADistribution(format!(
                "{name} has total mass {mass}, expected 1 within {MASS_TOL:e}"
            )));
        }
    }
    Ok(tvd_unchecked(&p.normalized().0, &q.normalized().0))
}

fn tvd_unchecked(p: &PositionDistribution, q: &PositionDistribution) -> f64 {
    let mut support: Vec<i64> = p.0.keys().chain(q.0.keys()).copied().collect();
    support.sort_unstable();
    support.dedup();
    let sum: f64 = support.iter().map(|&x| (p.get(x) - q.get(x)).abs()).sum();
    (0.5 * sum).clamp(0.0, 1.0)
}

/// Total variation after rescaling each side to unit mass; also returns the
/// original masses.
pub fn total_variation_renormalized(
    p: &PositionDistribution,
    q: &PositionDistribution,
) -> (f64, f64, f64) {
    let (pn, pm) = p.normalized();
    let (qn, qm) = q.normalized();
    (tvd_unchecked(&pn, &qn), pm, qm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SiteError {
    pub x: i64,
    pub plus: f64,
    pub minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// Total variation between the (renormalized) position distributions.
    pub tvd: f64,
    /// `‖a − e^{iφ}b‖₂`.
    pub l2_amp_error: f64,
    /// The phase `φ` applied to `b`; zero unless alignment was requested.
    pub aligned_phase: f64,
    pub per_site_errors: Vec<SiteError>,
    /// Squared norms of `a` and `b` before renormalization.
    pub mass_a: f64,
    pub mass_b: f64,
}

/// ℓ² distance between two coined states, optionally minimized over a global phase.
///
/// The minimizing phase is `φ = arg⟨b, a⟩`.
pub fn amplitude_error(a: &CoinedState, b: &CoinedState, align_phase: bool) -> ComparisonReport {
    let lo = a.x_min().min(b.x_min());
    let hi = a.x_max().max(b.x_max());
    let phase = if align_phase {
        let inner: Complex64 = (lo..=hi)
            .flat_map(|x| [(x, 1i8), (x, -1i8)])
            .map(|(x, y)| b.amplitude(x, y).conj() * a.amplitude(x, y))
            .sum();
        if inner.norm() > 0.0 {
            inner.arg()
        } else {
            0.0
        }
    } else {
        0.0
    };
    let rotation = Complex64::cis(phase);

    let per_site_errors: Vec<SiteError> = (lo..=hi)
        .map(|x| SiteError {
            x,
            plus: (a.amplitude(x, 1) - rotation * b.amplitude(x, 1)).norm(),
            minus: (a.amplitude(x, -1) - rotation * b.amplitude(x, -1)).norm(),
        })
        .collect();
    let l2_amp_error = per_site_errors
        .iter()
        .map(|e| e.plus * e.plus + e.minus * e.minus)
        .sum::<f64>()
        .sqrt();
    let (tvd, mass_a, mass_b) = total_variation_renormalized(&a.distribution(), &b.distribution());

    ComparisonReport {
        tvd,
        l2_amp_error,
        aligned_phase: phase,
        per_site_errors,
        mass_a,
        mass_b,
    }
}

/// Least-squares slope of `log(error)` against `log(samples)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// False when the error does not decrease with the sample count.
    pub converging: bool,
}

impl SlopeFit {
    /// Slopes above this are reported as non-converging.
    pub const CONVERGING_BELOW: f64 = -0.1;

    pub fn from_points(points: &[(u64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(WalkError::InvalidArgument(
                "a slope needs at least two points".into(),
            ));
        }
        if let Some((m, e)) = points.iter().find(|(m, e)| *m == 0 || !(*e > 0.0)) {
            return Err(WalkError::InvalidArgument(format!(
                "cannot take logarithms of samples = {m}, error = {e}"
            )));
        }
        let xs: Vec<f64> = points.iter().map(|(m, _)| (*m as f64).ln()).collect();
        let ys: Vec<f64> = points.iter().map(|(_, e)| e.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        if sxx == 0.0 {
            return Err(WalkError::InvalidArgument(
                "sample counts must differ".into(),
            ));
        }
        let slope = sxy / sxx;
        Ok(SlopeFit {
            slope,
            intercept: my - slope * mx,
            converging: slope <= Self::CONVERGING_BELOW,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceConfig {
    pub coin: CoinSpec,
    pub init: PointMassInitialState,
    pub steps: usize,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub samples: u64,
    pub seed: u64,
    pub tvd: f64,
    pub l2: f64,
    /// Total probability of the estimate before renormalization.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub config: ConvergenceConfig,
    pub rows: Vec<ConvergenceRow>,
    pub fit: SlopeFit,
}

/// Seed used for the `index`-th grid point.
pub fn grid_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

/// Runs the discrete estimator at each sample count and fits the decay of the
/// total-variation error.
pub fn convergence_study(config: &ConvergenceConfig, grid: &[u64]) -> Result<ConvergenceStudy> {
    if grid.len() < 3 {
        return Err(WalkError::InvalidArgument(format!(
            "sample grid needs at least 3 points, got {}",
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(WalkError::InvalidArgument(
            "sample grid must be strictly increasing".into(),
        ));
    }
    let reference = evolve_coined(
        &config.init.to_state(),
        &config.coin.to_matrix(),
        config.steps,
    );
    let reference_dist = reference.distribution();

    let mut rows = Vec::with_capacity(grid.len());
    for (i, &samples) in grid.iter().enumerate() {
        let seed = grid_seed(config.seed, i);
        let report = estimate_discrete(
            &config.coin,
            &config.init,
            config.steps,
            &McConfig::new(samples, seed, config.workers),
        )?;
        let (tvd, mass, _) =
            total_variation_renormalized(&report.estimate.distribution(), &reference_dist);
        let l2 = amplitude_error(&report.estimate, &reference, false).l2_amp_error;
        rows.push(ConvergenceRow {
            samples,
            seed,
            tvd,
            l2,
            mass,
        });
    }
    let points: Vec<(u64, f64)> = rows.iter().map(|r| (r.samples, r.tvd)).collect();
    let fit = SlopeFit::from_points(&points)?;
    Ok(ConvergenceStudy {
        config: config.clone(),
        rows,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::CoinMatrix;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn dist(pairs: &[(i64, f64)]) -> PositionDistribution {
        pairs.iter().copied().collect()
    }

    #[test]
    fn tvd_identical_is_zero() {
        let p = dist(&[(0, 0.25), (2, 0.75)]);
        assert_eq!(total_variation(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn tvd_disjoint_is_one() {
        let p = dist(&[(0, 1.0)]);
        let q = dist(&[(3, 0.5), (5, 0.5)]);
        assert_eq!(total_variation(&p, &q).unwrap(), 1.0);
    }

    #[test]
    fn tvd_half() {
        let p = dist(&[(0, 0.5), (1, 0.5)]);
        let q = dist(&[(0, 1.0)]);
        assert!((total_variation(&p, &q).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tvd_rejects_bad_input() {
        let ok = dist(&[(0, 1.0)]);
        assert!(matches!(
            total_variation(&dist(&[(0, 1.1), (1, -0.1)]), &ok),
            Err(WalkError::NotADistribution(_))
        ));
        assert!(matches!(
            total_variation(&dist(&[(0, 0.9)]), &ok),
            Err(WalkError::NotADistribution(_))
        ));
        // small mass defects are rescaled away
        assert!(total_variation(&dist(&[(0, 1.0 + 5e-7)]), &ok).unwrap() < 1e-12);
    }

    fn sample_state() -> CoinedState {
        evolve_coined(
            &PointMassInitialState::symmetric().to_state(),
            &CoinMatrix::hadamard(),
            4,
        )
    }

    #[test]
    fn identical_states() {
        let a = sample_state();
        let r = amplitude_error(&a, &a, true);
        assert_eq!(r.l2_amp_error, 0.0);
        assert_eq!(r.aligned_phase, 0.0);
        assert!(r.tvd <= 1e-12);
    }

    #[test]
    fn global_phase_is_removed() {
        let b = sample_state();
        let a = b.scale(Complex64::new(0.0, 1.0));
        let r = amplitude_error(&a, &b, true);
        assert!(r.l2_amp_error < 1e-15);
        assert!((r.aligned_phase - FRAC_PI_2).abs() < 1e-15);
        let raw = amplitude_error(&a, &b, false);
        assert!((raw.l2_amp_error - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn perturbation_bound() {
        let b = sample_state();
        let mut a = b.clone();
        *a.amplitude_mut(0, 1).unwrap() += Complex64::new(6e-4, 8e-4);
        let r = amplitude_error(&a, &b, true);
        assert!(r.l2_amp_error <= 1e-3 + 1e-15);
    }

    #[test]
    fn slope_of_flat_errors_is_zero() {
        let fit = SlopeFit::from_points(&[(10, 0.1), (100, 0.1), (1000, 0.1)]).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert!(!fit.converging);
    }

    #[test]
    fn slope_of_inverse_sqrt() {
        let pts: Vec<(u64, f64)> = [100u64, 1000, 10_000]
            .iter()
            .map(|&m| (m, 3.0 / (m as f64).sqrt()))
            .collect();
        let fit = SlopeFit::from_points(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit.converging);
    }

    #[test]
    fn grid_validation() {
        let config = ConvergenceConfig {
            coin: CoinSpec::hadamard(),
            init: PointMassInitialState::symmetric(),
            steps: 2,
            seed: 0,
            workers: 1,
        };
        assert!(convergence_study(&config, &[100, 100, 1000]).is_err());
        assert!(convergence_study(&config, &[100, 1000]).is_err());
        assert!(convergence_study(&config, &[1000, 100, 10_000]).is_err());
    }

    fn random_distribution(weights: &[f64]) -> PositionDistribution {
        let total: f64 = weights.iter().sum();
        weights
            .iter()
            .enumerate()
            .map(|(i, w)| (i as i64 - 3, w / total))
            .collect()
    }

    fn random_state(values: &[f64]) -> CoinedState {
        let n = values.len() / 4;
        let plus: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(values[4 * i], values[4 * i + 1]))
            .collect();
        let minus: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(values[4 * i + 2], values[4 * i + 3]))
            .collect();
        let s = CoinedState::from_amplitudes(0, plus, minus).unwrap();
        let norm = s.norm_sqr().sqrt();
        s.scale(Complex64::new(1.0 / norm, 0.0))
    }

    proptest! {
        #[test]
        fn tvd_metric_axioms(
            a in prop::collection::vec(0.01f64..1.0, 7),
            b in prop::collection::vec(0.01f64..1.0, 7),
            c in prop::collection::vec(0.01f64..1.0, 7),
        ) {
            let (p, q, r) = (random_distribution(&a), random_distribution(&b), random_distribution(&c));
            let pq = total_variation(&p, &q).unwrap();
            prop_assert!((pq - total_variation(&q, &p).unwrap()).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&pq));
            let pr = total_variation(&p, &r).unwrap();
            let rq = total_variation(&r, &q).unwrap();
            prop_assert!(pq <= pr + rq + 1e-12);
        }

        #[test]
        fn aligned_error_ignores_phases(
            a in prop::collection::vec(-1.0f64..1.0, 24),
            b in prop::collection::vec(-1.0f64..1.0, 24),
            phi in 0.0f64..std::f64::consts::TAU,
            psi in 0.0f64..std::f64::consts::TAU,
        ) {
            let (sa, sb) = (random_state(&a), random_state(&b));
            let base = amplitude_error(&sa, &sb, true).l2_amp_error;
            let rotated = amplitude_error(&sa.scale(Complex64::cis(phi)), &sb.scale(Complex64::cis(psi)), true);
            prop_assert!((rotated.l2_amp_error - base).abs() < 1e-12);
        }

        #[test]
        fn tvd_bounded_by_twice_l2(
            a in prop::collection::vec(-1.0f64..1.0, 24),
            b in prop::collection::vec(-1.0f64..1.0, 24),
        ) {
            let (sa, sb) = (random_state(&a), random_state(&b));
            let r = amplitude_error(&sa, &sb, false);
            prop_assert!(r.tvd <= 2.0 * r.l2_amp_error + 1e-12);
        }
    }
}
