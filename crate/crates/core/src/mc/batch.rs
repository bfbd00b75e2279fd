//! Sample partitioning and batch-means error estimates.

use num_complex::Complex64;

/// Number of equal batches used for standard errors.
pub const BATCHES: u64 = 64;

/// Contiguous batch sizes covering `samples`; the first `samples % B` batches get one extra.
pub fn partition(samples: u64) -> Vec<u64> {
    let batches = BATCHES.min(samples).max(1);
    let base = samples / batches;
    let extra = samples % batches;
    (0..batches).map(|b| base + u64::from(b < extra)).collect()
}

/// Combines per-batch sums of a complex observable into a mean and a standard error.
///
/// `sums[b][i]` is the sum of the observable at index `i` over the samples of
/// batch `b`, which holds `sizes[b]` samples. The standard error is the modulus
/// spread of the batch means, `√(B/(B−1) · Σ_b (m_b/M)² |ā_b − ā|²)`; it is
/// zero with fewer than two batches.
pub fn batch_means(sums: &[Vec<Complex64>], sizes: &[u64]) -> (Vec<Complex64>, Vec<f64>) {
    assert_eq!(sums.len(), sizes.len());
    let width = sums.first().map_or(0, Vec::len);
    let total: u64 = sizes.iter().sum();
    let total_f = total as f64;

    let mut mean = vec![Complex64::new(0.0, 0.0); width];
    for batch in sums {
        for (m, s) in mean.iter_mut().zip(batch) {
            *m += s;
        }
    }
    for m in &mut mean {
        *m /= total_f;
    }

    let b = sums.len();
    let mut err = vec![0.0; width];
    if b >= 2 {
        let correction = b as f64 / (b - 1) as f64;
        for (batch, &size) in sums.iter().zip(sizes) {
            let size_f = size as f64;
            let weight = (size_f / total_f).powi(2);
            for ((e, s), m) in err.iter_mut().zip(batch).zip(&mean) {
                *e += weight * (s / size_f - m).norm_sqr();
            }
        }
        for e in &mut err {
            *e = (*e * correction).sqrt();
        }
    }
    (mean, err)
}

/// Standard errors of probabilities `p_g = Σ_{i ∈ g} |ā_i|²`, one per group of indices.
///
/// Each batch is linearized around the overall mean, `δp_b = Σ_i 2 Re(ā_i*(ā_{b,i} − ā_i))`,
/// and the batch-means spread of `δp_b` is combined in quadrature with
/// `Σ_i se_i²`, the upward bias of `|ā_i|²` that dominates where the
/// amplitude is near zero.
pub fn probability_std_err(
    sums: &[Vec<Complex64>],
    sizes: &[u64],
    mean: &[Complex64],
    err: &[f64],
    groups: &[Vec<usize>],
) -> Vec<f64> {
    let b = sums.len();
    let total_f = sizes.iter().sum::<u64>() as f64;
    groups
        .iter()
        .map(|group| {
            let bias: f64 = group.iter().map(|&i| err[i] * err[i]).sum();
            if b < 2 {
                return bias;
            }
            let spread: f64 = sums
                .iter()
                .zip(sizes)
                .map(|(batch, &size)| {
                    let size_f = size as f64;
                    let dp: f64 = group
                        .iter()
                        .map(|&i| 2.0 * (mean[i].conj() * (batch[i] / size_f - mean[i])).re)
                        .sum();
                    (size_f / total_f).powi(2) * dp * dp
                })
                .sum();
            (spread * b as f64 / (b - 1) as f64 + bias * bias).sqrt()
        })
        .collect()
}
