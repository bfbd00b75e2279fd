//! Coin operators: 2×2 unitaries acting on the internal ±1 degree of freedom.
//!
//! Basis ordering is `(|+1⟩, |−1⟩)`: row/column 0 is coin value `+1`, row/column 1
//! is coin value `−1`, so that `σ₃|y⟩ = y|y⟩`. Every coin in the crate is
//! parameterized by Euler angles
//!
//! ```text
//! C = e^{iδ} · e^{iλ₁σ₃} · e^{iλ₂σ₂} · e^{iλ₃σ₃}
//! ```
//!
//! where `δ` is a global phase that lifts the SU(2) factorization to all of U(2).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};

const UNITARY_INPUT_TOL: f64 = 1e-10;
/// Below this modulus an off-diagonal (or diagonal) block is treated as exactly zero.
const DEGENERATE_TOL: f64 = 1e-12;

/// Index of a coin value in the `(|+1⟩, |−1⟩)` basis.
#[inline]
pub(crate) fn coin_index(y: i8) -> usize {
    if y > 0 {
        0
    } else {
        1
    }
}

/// A 2×2 complex matrix in the `(|+1⟩, |−1⟩)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinMatrix(pub [[Complex64; 2]; 2]);

impl CoinMatrix {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        CoinMatrix([[one, zero], [zero, one]])
    }

    /// The Hadamard coin `(1/√2)[[1, 1], [1, −1]]`.
    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        CoinMatrix([[h, h], [h, -h]])
    }

    pub fn from_rows(rows: [[Complex64; 2]; 2]) -> Self {
        CoinMatrix(rows)
    }

    /// Entry `⟨y|C|y'⟩` addressed by coin values.
    #[inline]
    pub fn entry(&self, y: i8, y_prime: i8) -> Complex64 {
        self.0[coin_index(y)][coin_index(y_prime)]
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let m = &self.0;
        CoinMatrix([
            [m[0][0] * factor, m[0][1] * factor],
            [m[1][0] * factor, m[1][1] * factor],
        ])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        CoinMatrix([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn determinant(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Applies the matrix to a coin vector `(ψ₊, ψ₋)`.
    #[inline]
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &CoinMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// Largest deviation of the columns from an orthonormal pair.
    pub fn unitarity_defect(&self) -> f64 {
        let m = &self.0;
        let norm0 = m[0][0].norm_sqr() + m[1][0].norm_sqr();
        let norm1 = m[0][1].norm_sqr() + m[1][1].norm_sqr();
        let overlap = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
        (norm0 - 1.0)
            .abs()
            .max((norm1 - 1.0).abs())
            .max(overlap.norm())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }
}

impl Mul for CoinMatrix {
    type Output = CoinMatrix;

    fn mul(self, rhs: CoinMatrix) -> CoinMatrix {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        CoinMatrix(out)
    }
}

/// `e^{iθσ₃} = diag(e^{iθ}, e^{−iθ})`.
pub fn sigma3_exp(theta: f64) -> CoinMatrix {
    let zero = Complex64::new(0.0, 0.0);
    CoinMatrix([
        [Complex64::cis(theta), zero],
        [zero, Complex64::cis(-theta)],
    ])
}

/// `e^{iθσ₂} = [[cos θ, sin θ], [−sin θ, cos θ]]`.
pub fn sigma2_exp(theta: f64) -> CoinMatrix {
    let (s, c) = theta.sin_cos();
    CoinMatrix([
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
    ])
}

/// Reduces an angle to `[0, 2π)`, snapping values within `1e-12` of `2π` to zero.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if TAU - r < 1e-12 {
        0.0
    } else {
        r
    }
}

/// Euler angles of a coin, all stored in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinSpec {
    pub delta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl CoinSpec {
    pub fn new(delta: f64, lambda1: f64, lambda2: f64, lambda3: f64) -> Self {
        CoinSpec {
            delta: reduce_angle(delta),
            lambda1: reduce_angle(lambda1),
            lambda2: reduce_angle(lambda2),
            lambda3: reduce_angle(lambda3),
        }
    }

    /// Angles of the Hadamard coin `H` itself (not merely `H` up to phase).
    pub fn hadamard() -> Self {
        CoinSpec::new(3.0 * FRAC_PI_2, FRAC_PI_2, FRAC_PI_4, 0.0)
    }

    /// Pure `e^{iλσ₂}` coin.
    pub fn sigma2(lambda: f64) -> Self {
        CoinSpec::new(0.0, 0.0, lambda, 0.0)
    }

    /// Pure `e^{iλσ₃}` coin.
    pub fn sigma3(lambda: f64) -> Self {
        CoinSpec::new(0.0, lambda, 0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        [self.delta, self.lambda1, self.lambda2, self.lambda3]
            .iter()
            .all(|a| a.is_finite())
    }

    pub fn to_matrix(&self) -> CoinMatrix {
        coin_from_euler(self)
    }

    /// The same coin without its global phase.
    pub fn without_phase(&self) -> Self {
        CoinSpec {
            delta: 0.0,
            ..*self
        }
    }
}

/// Builds `e^{iδ}·e^{iλ₁σ₃}·e^{iλ₂σ₂}·e^{iλ₃σ₃}`.
pub fn coin_from_euler(spec: &CoinSpec) -> CoinMatrix {
    (sigma3_exp(spec.lambda1) * sigma2_exp(spec.lambda2) * sigma3_exp(spec.lambda3))
        .scale(Complex64::cis(spec.delta))
}

/// Recovers Euler angles from a unitary.
///
/// The representation is made canonical by taking `λ₂ ∈ [0, π/2]`, then
/// `λ₃ ∈ [0, π)` and `λ₁ ∈ [0, π)` using the two sign freedoms
/// `(λ₁, λ₃) → (λ₁ + π, λ₃ + π)` and `(δ, λ₁) → (δ + π, λ₁ + π)`. When `λ₂`
/// is `0` or `π/2` only one combination of `λ₁` and `λ₃` is determined and
/// `λ₃ = 0` is chosen.
pub fn euler_decompose(u: &CoinMatrix) -> Result<CoinSpec> {
    let defect = u.unitarity_defect();
    if !(defect <= UNITARY_INPUT_TOL) {
        return Err(WalkError::NonUnitaryInput(format!(
            "column orthonormality defect {defect:e} exceeds {UNITARY_INPUT_TOL:e}"
        )));
    }

    let mut delta = u.determinant().arg() / 2.0;
    let v = u.scale(Complex64::cis(-delta));
    let diag = v.0[0][0];
    let off = v.0[0][1];
    let lambda2 = off.norm().atan2(diag.norm());

    let (mut lambda1, mut lambda3) = if off.norm() < DEGENERATE_TOL {
        (diag.arg(), 0.0)
    } else if diag.norm() < DEGENERATE_TOL {
        (off.arg(), 0.0)
    } else {
        let sum = diag.arg();
        let difference = off.arg();
        ((sum + difference) / 2.0, (sum - difference) / 2.0)
    };

    lambda3 = reduce_angle(lambda3);
    if lambda3 >= PI {
        lambda3 -= PI;
        lambda1 += PI;
    }
    lambda1 = reduce_angle(lambda1);
    if lambda1 >= PI {
        lambda1 -= PI;
        delta += PI;
    }

    Ok(CoinSpec::new(delta, lambda1, lambda2, lambda3))
}
