use serde::Serialize;

use super::rng::{PoissonSampler, RngStream};
use crate::error::{Result, WalkError};

/// Jump counts `N₁..Nₙ` of one trajectory with their running sums.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct TrajectorySample {
    /// `N₁, …, Nₙ`.
    pub jumps: Vec<u64>,
    /// `S₀ = 0, S₁, …, Sₙ`.
    pub partial_sums: Vec<u64>,
    /// `Σ_{j=0}^{n−1} (−1)^{Sⱼ}`: where the `+1` coin reading lands.
    pub landing_sum: i64,
}

impl TrajectorySample {
    pub fn from_jumps(jumps: Vec<u64>) -> Self {
        let mut partial_sums = Vec::with_capacity(jumps.len() + 1);
        let mut s = 0;
        partial_sums.push(s);
        for &n in &jumps {
            s += n;
            partial_sums.push(s);
        }
        let landing_sum = partial_sums[..jumps.len()]
            .iter()
            .map(|s| if s % 2 == 0 { 1 } else { -1 })
            .sum();
        TrajectorySample {
            jumps,
            partial_sums,
            landing_sum,
        }
    }

    pub fn steps(&self) -> usize {
        self.jumps.len()
    }

    /// `Sₙ`.
    pub fn total(&self) -> u64 {
        *self.partial_sums.last().unwrap_or(&0)
    }
}

/// Draws `n` i.i.d. Poisson(λ₂) jump counts.
pub fn sample_trajectory(n: usize, lambda2: f64, rng: &mut RngStream) -> Result<TrajectorySample> {
    if n == 0 {
        return Err(WalkError::InvalidArgument(
            "a trajectory needs at least one step".into(),
        ));
    }
    let sampler = PoissonSampler::new(lambda2)?;
    let jumps = (0..n).map(|_| sampler.sample(rng)).collect();
    Ok(TrajectorySample::from_jumps(jumps))
}

/// Landing sum and `Sₙ` of a fresh trajectory, without allocating.
///
/// Consumes the stream exactly as [`sample_trajectory`] does.
#[inline]
pub(crate) fn draw_landing(n: usize, sampler: &PoissonSampler, rng: &mut RngStream) -> (i64, u64) {
    let mut s = 0u64;
    let mut landing = 0i64;
    for _ in 0..n {
        landing += 1 - 2 * (s & 1) as i64;
        s += sampler.sample(rng);
    }
    (landing, s)
}
