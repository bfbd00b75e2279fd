//! Quantum walks on the integer line: exact unitary evolution, Poisson-index
//! series, and Monte Carlo estimators built on Poisson jump counts.
//!
//! * [`coin`] and [`state`]: coins in Euler-angle form and finitely supported states.
//! * [`reference`]: exact coined-walk steps and the continuous-time propagator `e^{iλPt}`.
//! * [`series`]: deterministic evaluation of the index series behind the estimators.
//! * [`mc`]: seeded, parallel Monte Carlo estimators with batch-means errors.
//! * [`analysis`]: distances between distributions and convergence studies.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod coin;
pub mod error;
pub mod mc;
pub mod reference;
pub mod series;
pub mod state;

pub use coin::{coin_from_euler, euler_decompose, CoinMatrix, CoinSpec};
pub use error::{Result, WalkError};
pub use num_complex::Complex64;
pub use reference::{
    bessel_j, continuous_point_mass_amplitude, evolve_coined, evolve_continuous, step_coined,
    GeneratorKind, LatticeGenerator,
};
pub use series::SeriesTruncation;
pub use state::{
    point_mass_state, CoinedState, PointMassInitialState, PositionDistribution, ScalarState,
};
