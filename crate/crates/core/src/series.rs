//! Deterministic evaluation of the Poisson-index series for coined walks.
//!
//! Expanding `e^{iλσ₂} = Σ_k (iλ)^k σ₂^k / k!` turns one walk step into a sum
//! over a non-negative index `k`: even `k` keeps the coin value, odd `k` flips
//! it and contributes `σ₂|y'⟩ = i^{y'}|−y'⟩`. With source coin
//! `y' = (−1)^k y` this gives
//!
//! ```text
//! (UΨ)(x, y) = e^{iδ} Σ_k e^{iλ₁y} e^{iλ₃y'} (λ₂^k / k!) i^{k + y'·(1 − (−1)^k)/2} Ψ(x − y, y')
//! ```
//!
//! The routines here evaluate these sums with an explicit truncation order and
//! serve as exact oracles for both the matrix evolution and the Monte Carlo
//! estimators.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coin::CoinSpec;
use crate::error::{Result, WalkError};
use crate::state::{CoinedState, PointMassInitialState};

const TAIL_TOL: f64 = 1e-14;

/// `i^m` for any integer `m`.
#[inline]
pub(crate) fn i_pow(m: i64) -> Complex64 {
    match m.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Upper bound on the summed index `k` in each step's series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesTruncation {
    order: usize,
    checked: bool,
}

impl SeriesTruncation {
    /// Valid for every rate in `(0, 2π)`.
    pub const DEFAULT_ORDER: usize = 64;

    pub fn new(order: usize) -> Self {
        SeriesTruncation {
            order,
            checked: true,
        }
    }

    /// A truncation exempt from the tail-bound check, for studying truncation error.
    pub fn unchecked(order: usize) -> Self {
        SeriesTruncation {
            order,
            checked: false,
        }
    }

    /// Smallest order satisfying the tail bound for `rate`.
    pub fn for_rate(rate: f64) -> Result<Self> {
        (0..=1000)
            .map(SeriesTruncation::new)
            .find(|t| t.tail_bound(rate) < TAIL_TOL)
            .ok_or(WalkError::NonConvergence {
                cap: 1000,
                bound: SeriesTruncation::new(1000).tail_bound(rate),
            })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `|λ|^{K+1} / (K+1)! · e^{|λ|}`.
    pub fn tail_bound(&self, rate: f64) -> f64 {
        let a = rate.abs();
        let mut term = 1.0;
        for j in 1..=self.order + 1 {
            term *= a / j as f64;
        }
        term * a.exp()
    }

    pub fn validate(&self, rate: f64) -> Result<()> {
        let bound = self.tail_bound(rate);
        if self.checked && !(bound < TAIL_TOL) {
            return Err(WalkError::TruncationInvalid {
                order: self.order,
                rate,
                bound,
            });
        }
        Ok(())
    }
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        SeriesTruncation::new(Self::DEFAULT_ORDER)
    }
}

/// `λ^k / k!` for `k = 0..=order`.
fn poisson_weights(lambda: f64, order: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(order + 1);
    let mut term = 1.0;
    w.push(term);
    for k in 1..=order {
        term *= lambda / k as f64;
        w.push(term);
    }
    w
}

#[inline]
fn flip(y: i8, k: usize) -> i8 {
    if k.is_multiple_of(2) {
        y
    } else {
        -y
    }
}

/// `i^{y'·(1 − (−1)^k)/2}`: the phase picked up when `σ₂^k` acts on `|y'⟩`.
#[inline]
fn flip_phase_exponent(source_y: i8, k: usize) -> i64 {
    if k.is_multiple_of(2) {
        0
    } else {
        source_y as i64
    }
}

/// One step with coin `e^{iλσ₂}` via the index series.
pub fn step_sigma2_series(
    state: &CoinedState,
    lambda: f64,
    trunc: &SeriesTruncation,
) -> Result<CoinedState> {
    trunc.validate(lambda)?;
    let weights = poisson_weights(lambda, trunc.order());
    let mut out = CoinedState::zeros(state.x_min() - 1, state.x_max() + 1);
    for x in out.x_min()..=out.x_max() {
        for y in [1i8, -1] {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, w) in weights.iter().enumerate() {
                let source_y = flip(y, k);
                let phase = i_pow(k as i64 + flip_phase_exponent(source_y, k));
                acc += phase * *w * state.amplitude(x - y as i64, source_y);
            }
            *out.amplitude_mut(x, y).unwrap() = acc;
        }
    }
    Ok(out)
}

/// One step with coin `e^{iλσ₃}` via `Σ_k i^{ky} λ^k/k! Ψ(x − y, y)`.
pub fn step_sigma3_series(
    state: &CoinedState,
    lambda: f64,
    trunc: &SeriesTruncation,
) -> Result<CoinedState> {
    trunc.validate(lambda)?;
    let weights = poisson_weights(lambda, trunc.order());
    let mut out = CoinedState::zeros(state.x_min() - 1, state.x_max() + 1);
    for x in out.x_min()..=out.x_max() {
        for y in [1i8, -1] {
            let source = state.amplitude(x - y as i64, y);
            let series: Complex64 = weights
                .iter()
                .enumerate()
                .map(|(k, w)| i_pow(k as i64 * y as i64) * *w)
                .sum();
            *out.amplitude_mut(x, y).unwrap() = series * source;
        }
    }
    Ok(out)
}

/// One step with the general coin `e^{iδ}e^{iλ₁σ₃}e^{iλ₂σ₂}e^{iλ₃σ₃}` via the index series.
pub fn step_general_series(
    state: &CoinedState,
    spec: &CoinSpec,
    trunc: &SeriesTruncation,
) -> Result<CoinedState> {
    trunc.validate(spec.lambda2)?;
    let weights = poisson_weights(spec.lambda2, trunc.order());
    let global = Complex64::cis(spec.delta);
    let mut out = CoinedState::zeros(state.x_min() - 1, state.x_max() + 1);
    for x in out.x_min()..=out.x_max() {
        for y in [1i8, -1] {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, w) in weights.iter().enumerate() {
                let source_y = flip(y, k);
                let phase = Complex64::cis(spec.lambda1 * y as f64)
                    * Complex64::cis(spec.lambda3 * source_y as f64)
                    * i_pow(k as i64 + flip_phase_exponent(source_y, k));
                acc += phase * *w * state.amplitude(x - y as i64, source_y);
            }
            *out.amplitude_mut(x, y).unwrap() = global * acc;
        }
    }
    Ok(out)
}

/// `Ψₙ(x, y) = e^{inλy} Ψ₀(x − ny, y)` for the coin `e^{iλσ₃}`.
pub fn sigma3_closed_form(init: &CoinedState, lambda: f64, n: usize) -> CoinedState {
    let shift = n as i64;
    let mut out = CoinedState::zeros(init.x_min() - shift, init.x_max() + shift);
    for (x, p, m) in init.sites() {
        *out.amplitude_mut(x + shift, 1).unwrap() = Complex64::cis(n as f64 * lambda) * p;
        *out.amplitude_mut(x - shift, -1).unwrap() = Complex64::cis(-(n as f64) * lambda) * m;
    }
    out
}

pub const BRUTEFORCE_MAX_STEPS: usize = 4;
pub const BRUTEFORCE_MAX_ORDER: usize = 40;

/// The `n`-step amplitude as an explicit sum over all index tuples `(k₁, …, kₙ)`.
///
/// For each output site `(x, y)` the backward path is `y₀ = y`,
/// `yⱼ = (−1)^{kⱼ} yⱼ₋₁`, `xₙ = x − Σ_{j<n} yⱼ`, and each tuple contributes
///
/// ```text
/// e^{inδ} e^{iλ₁Σ_{j=0}^{n−1}yⱼ} e^{iλ₃Σ_{j=1}^{n}yⱼ} i^{Σkⱼ + Σyⱼ(1−(−1)^{kⱼ})/2} λ₂^{Σkⱼ}/(k₁!…kₙ!) Ψ₀(xₙ, yₙ)
/// ```
///
/// Sites are summed independently (in parallel); within a site the tuple order
/// is fixed, so the result does not depend on the thread count.
pub fn nstep_bruteforce(
    init: &PointMassInitialState,
    spec: &CoinSpec,
    n: usize,
    trunc: &SeriesTruncation,
) -> Result<CoinedState> {
    if n > BRUTEFORCE_MAX_STEPS || trunc.order() > BRUTEFORCE_MAX_ORDER {
        return Err(WalkError::ComplexityGuard(format!(
            "n = {n}, K = {} exceeds the caps n <= {BRUTEFORCE_MAX_STEPS}, K <= {BRUTEFORCE_MAX_ORDER}",
            trunc.order()
        )));
    }
    trunc.validate(spec.lambda2)?;
    let weights = poisson_weights(spec.lambda2, trunc.order());
    let initial = init.to_state();
    let reach = n as i64;

    let sites: Vec<(i64, i8)> = (-reach..=reach)
        .flat_map(|x| [(x, 1i8), (x, -1i8)])
        .collect();
    let values: Vec<Complex64> = sites
        .par_iter()
        .map(|&(x, y)| site_sum(&initial, spec, n, &weights, x, y))
        .collect();

    let mut out = CoinedState::zeros(-reach, reach);
    for ((x, y), v) in sites.into_iter().zip(values) {
        *out.amplitude_mut(x, y).unwrap() = v;
    }
    Ok(out)
}

fn site_sum(
    initial: &CoinedState,
    spec: &CoinSpec,
    n: usize,
    weights: &[f64],
    x: i64,
    y: i8,
) -> Complex64 {
    let global = Complex64::cis(n as f64 * spec.delta);
    let mut tuple = vec![0usize; n];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let mut coin = y;
        let mut sum_before = 0i64; // Σ_{j=0}^{n-1} y_j
        let mut sum_after = 0i64; // Σ_{j=1}^{n} y_j
        let mut i_exponent = 0i64;
        let mut magnitude = 1.0;
        for &k in &tuple {
            sum_before += coin as i64;
            coin = flip(coin, k);
            sum_after += coin as i64;
            i_exponent += k as i64 + flip_phase_exponent(coin, k);
            magnitude *= weights[k];
        }
        let psi0 = initial.amplitude(x - sum_before, coin);
        if psi0 != Complex64::new(0.0, 0.0) {
            total +=
                Complex64::cis(spec.lambda1 * sum_before as f64 + spec.lambda3 * sum_after as f64)
                    * i_pow(i_exponent)
                    * magnitude
                    * psi0;
        }

        // odometer over [0, K]^n
        let mut j = 0;
        loop {
            if j == n {
                return global * total;
            }
            tuple[j] += 1;
            if tuple[j] < weights.len() {
                break;
            }
            tuple[j] = 0;
            j += 1;
        }
    }
}
