//! Weighted marginal summaries.

use crate::weights::neumaier_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalSummary {
    pub mean: f64,
    pub variance: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

/// Mean, variance and 5/50/95% quantiles of a weighted sample whose weights
/// sum to one.
pub fn summarize(samples: &[(f64, f64)]) -> MarginalSummary {
    let mean = neumaier_sum(&samples.iter().map(|(x, w)| x * w).collect::<Vec<_>>());
    let variance = neumaier_sum(
        &samples
            .iter()
            .map(|(x, w)| w * (x - mean) * (x - mean))
            .collect::<Vec<_>>(),
    )
    .max(0.0);
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    MarginalSummary {
        mean,
        variance,
        q05: quantile_sorted(&sorted, 0.05),
        q50: quantile_sorted(&sorted, 0.50),
        q95: quantile_sorted(&sorted, 0.95),
    }
}

/// Smallest value whose cumulative weight reaches `q`.
pub fn quantile_sorted(sorted: &[(f64, f64)], q: f64) -> f64 {
    let total: f64 = sorted.iter().map(|s| s.1).sum();
    let target = q * total;
    let mut acc = 0.0;
    for &(x, w) in sorted {
        acc += w;
        if acc >= target - 1e-12 * total && w > 0.0 {
            return x;
        }
    }
    sorted.last().map_or(f64::NAN, |s| s.0)
}

/// Effective number of distinct values: the ESS after pooling the weights of
/// identical samples. Resampled duplicates count once.
pub fn distinct_ess(samples: &[(f64, f64)]) -> f64 {
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut sum_sq = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut w = 0.0;
        let x = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == x {
            w += sorted[i].1;
            i += 1;
        }
        sum_sq += w * w;
    }
    1.0 / sum_sq
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass() {
        let s = summarize(&[(2.0, 0.5), (2.0, 0.5)]);
        assert_eq!((s.mean, s.variance, s.q05, s.q50, s.q95), (2.0, 0.0, 2.0, 2.0, 2.0));
    }

    #[test]
    fn weighted_moments_and_quantiles() {
        let s = summarize(&[(3.0, 0.25), (1.0, 0.5), (2.0, 0.25)]);
        assert!((s.mean - 1.75).abs() < 1e-15);
        assert!((s.variance - (0.5 * 0.5625 + 0.25 * 0.0625 + 0.25 * 1.5625)).abs() < 1e-15);
        assert_eq!(s.q05, 1.0);
        assert_eq!(s.q50, 1.0);
        assert_eq!(s.q95, 3.0);
    }

    #[test]
    fn distinct_ess_pools_duplicates() {
        assert!((distinct_ess(&[(1.0, 0.5), (1.0, 0.5)]) - 1.0).abs() < 1e-12);
        assert!((distinct_ess(&[(1.0, 0.5), (2.0, 0.5)]) - 2.0).abs() < 1e-12);
    }
}
