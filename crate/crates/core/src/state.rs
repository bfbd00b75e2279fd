//! Finitely supported wave functions on the integer line.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const NORMALIZATION_TOL: f64 = 1e-10;

/// Amplitudes `Ψ(x, ±1)` on the contiguous window `[x_min, x_max]`.
///
/// Sites outside the window carry zero amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinedState {
    x_min: i64,
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
}

impl CoinedState {
    pub fn zeros(x_min: i64, x_max: i64) -> Self {
        assert!(x_max >= x_min, "empty window [{x_min}, {x_max}]");
        let len = (x_max - x_min + 1) as usize;
        CoinedState {
            x_min,
            plus: vec![ZERO; len],
            minus: vec![ZERO; len],
        }
    }

    pub fn from_amplitudes(
        x_min: i64,
        plus: Vec<Complex64>,
        minus: Vec<Complex64>,
    ) -> Result<Self> {
        if plus.is_empty() || plus.len() != minus.len() {
            return Err(WalkError::InvalidArgument(format!(
                "coin sectors must be non-empty and equally long (got {} and {})",
                plus.len(),
                minus.len()
            )));
        }
        Ok(CoinedState { x_min, plus, minus })
    }

    pub fn x_min(&self) -> i64 {
        self.x_min
    }

    pub fn x_max(&self) -> i64 {
        self.x_min + self.plus.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }

    pub fn plus(&self) -> &[Complex64] {
        &self.plus
    }

    pub fn minus(&self) -> &[Complex64] {
        &self.minus
    }

    fn index(&self, x: i64) -> Option<usize> {
        let offset = x - self.x_min;
        (offset >= 0 && (offset as usize) < self.plus.len()).then_some(offset as usize)
    }

    /// `Ψ(x, y)`, zero outside the window.
    pub fn amplitude(&self, x: i64, y: i8) -> Complex64 {
        match self.index(x) {
            Some(i) if y > 0 => self.plus[i],
            Some(i) => self.minus[i],
            None => ZERO,
        }
    }

    pub fn amplitude_mut(&mut self, x: i64, y: i8) -> Option<&mut Complex64> {
        let i = self.index(x)?;
        Some(if y > 0 {
            &mut self.plus[i]
        } else {
            &mut self.minus[i]
        })
    }

    /// Iterates `(x, Ψ(x, +1), Ψ(x, −1))` over the window.
    pub fn sites(&self) -> impl Iterator<Item = (i64, Complex64, Complex64)> + '_ {
        self.plus
            .iter()
            .zip(&self.minus)
            .enumerate()
            .map(move |(i, (p, m))| (self.x_min + i as i64, *p, *m))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.plus
            .iter()
            .chain(&self.minus)
            .map(|a| a.norm_sqr())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.plus
            .iter()
            .chain(&self.minus)
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        CoinedState {
            x_min: self.x_min,
            plus: self.plus.iter().map(|a| a * factor).collect(),
            minus: self.minus.iter().map(|a| a * factor).collect(),
        }
    }

    /// Copy of the state on a window extended to cover `[x_min, x_max]`.
    pub fn widened(&self, x_min: i64, x_max: i64) -> Self {
        let lo = x_min.min(self.x_min);
        let hi = x_max.max(self.x_max());
        let mut out = CoinedState::zeros(lo, hi);
        let start = (self.x_min - lo) as usize;
        out.plus[start..start + self.len()].copy_from_slice(&self.plus);
        out.minus[start..start + self.len()].copy_from_slice(&self.minus);
        out
    }

    /// Largest entrywise modulus of `self − other` over the union of windows.
    pub fn max_abs_diff(&self, other: &CoinedState) -> f64 {
        let lo = self.x_min.min(other.x_min);
        let hi = self.x_max().max(other.x_max());
        (lo..=hi)
            .flat_map(|x| [(x, 1i8), (x, -1i8)])
            .map(|(x, y)| (self.amplitude(x, y) - other.amplitude(x, y)).norm())
            .fold(0.0, f64::max)
    }

    /// Position probabilities `|Ψ(x, +1)|² + |Ψ(x, −1)|²`.
    pub fn distribution(&self) -> PositionDistribution {
        PositionDistribution(
            self.sites()
                .map(|(x, p, m)| (x, p.norm_sqr() + m.norm_sqr()))
                .collect(),
        )
    }
}

/// Amplitudes `Ψ(x)` of a walk without internal degree of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarState {
    x_min: i64,
    amps: Vec<Complex64>,
}

impl ScalarState {
    pub fn zeros(x_min: i64, x_max: i64) -> Self {
        assert!(x_max >= x_min, "empty window [{x_min}, {x_max}]");
        ScalarState {
            x_min,
            amps: vec![ZERO; (x_max - x_min + 1) as usize],
        }
    }

    /// `δ_x`, unit amplitude at one site.
    pub fn point_mass(x: i64) -> Self {
        ScalarState {
            x_min: x,
            amps: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn from_amplitudes(x_min: i64, amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(WalkError::InvalidArgument("empty scalar state".into()));
        }
        Ok(ScalarState { x_min, amps })
    }

    pub fn x_min(&self) -> i64 {
        self.x_min
    }

    pub fn x_max(&self) -> i64 {
        self.x_min + self.amps.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, x: i64) -> Complex64 {
        let offset = x - self.x_min;
        if offset >= 0 && (offset as usize) < self.amps.len() {
            self.amps[offset as usize]
        } else {
            ZERO
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.amps
            .iter()
            .enumerate()
            .map(move |(i, a)| (self.x_min + i as i64, *a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.amps
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &ScalarState) -> f64 {
        let lo = self.x_min.min(other.x_min);
        let hi = self.x_max().max(other.x_max());
        (lo..=hi)
            .map(|x| (self.amplitude(x) - other.amplitude(x)).norm())
            .fold(0.0, f64::max)
    }

    pub fn distribution(&self) -> PositionDistribution {
        PositionDistribution(self.sites().map(|(x, a)| (x, a.norm_sqr())).collect())
    }
}

/// Initial state `|0⟩ ⊗ (α|+1⟩ + β|−1⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMassInitialState {
    alpha: Complex64,
    beta: Complex64,
}

impl PointMassInitialState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !((norm - 1.0).abs() <= NORMALIZATION_TOL) {
            return Err(WalkError::NotNormalized(norm));
        }
        Ok(PointMassInitialState { alpha, beta })
    }

    /// `α = 1/√2`, `β = i/√2`: the symmetric Hadamard-walk initial state.
    pub fn symmetric() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PointMassInitialState {
            alpha: Complex64::new(h, 0.0),
            beta: Complex64::new(0.0, h),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// Coefficient of coin value `y` at the origin.
    #[inline]
    pub fn coefficient(&self, y: i8) -> Complex64 {
        if y > 0 {
            self.alpha
        } else {
            self.beta
        }
    }

    pub fn to_state(&self) -> CoinedState {
        point_mass_state(self)
    }
}

pub fn point_mass_state(init: &PointMassInitialState) -> CoinedState {
    CoinedState {
        x_min: 0,
        plus: vec![init.alpha],
        minus: vec![init.beta],
    }
}

/// Probability mass per lattice site.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PositionDistribution(pub BTreeMap<i64, f64>);

impl PositionDistribution {
    pub fn get(&self, x: i64) -> f64 {
        self.0.get(&x).copied().unwrap_or(0.0)
    }

    pub fn mass(&self) -> f64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.0.iter().map(|(x, p)| (*x, *p))
    }

    /// The distribution rescaled to unit mass, together with the original mass.
    pub fn normalized(&self) -> (PositionDistribution, f64) {
        let mass = self.mass();
        let scaled = if mass > 0.0 {
            self.0.iter().map(|(x, p)| (*x, p / mass)).collect()
        } else {
            self.0.clone()
        };
        (PositionDistribution(scaled), mass)
    }
}

impl FromIterator<(i64, f64)> for PositionDistribution {
    fn from_iter<I: IntoIterator<Item = (i64, f64)>>(iter: I) -> Self {
        PositionDistribution(iter.into_iter().collect())
    }
}
