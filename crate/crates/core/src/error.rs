use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error("matrix is not unitary: {0}")]
    NonUnitaryInput(String),

    #[error("initial coin state is not normalized: |alpha|^2 + |beta|^2 = {0}")]
    NotNormalized(f64),

    #[error("state window too small: {0}")]
    WindowOverflow(String),

    #[error("series did not converge within {cap} terms (tail bound {bound:e})")]
    NonConvergence { cap: usize, bound: f64 },

    #[error("truncation order {order} is too small for rate {rate} (tail bound {bound:e})")]
    TruncationInvalid { order: usize, rate: f64, bound: f64 },

    #[error("brute-force sum too large: {0}")]
    ComplexityGuard(String),

    #[error("Poisson rate {0} outside the supported range")]
    RateOutOfRange(f64),

    #[error("exponential weight e^{exponent} overflows useful precision (limit e^{limit})")]
    WeightOverflow { exponent: f64, limit: f64 },

    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, WalkError>;
