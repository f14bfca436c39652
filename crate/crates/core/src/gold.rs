//! Exact posterior of missing AR(1) values given the nearest observations.
//!
//! Conditional on its flanking observations a missing value is independent of
//! everything else, so its posterior is Gaussian: a bridge between two
//! observed times, or a tail when only one side is observed. Leading tails
//! use the reversibility of the stationary chain.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::ar1::Ar1Params;
use crate::error::{Result, SisError};
use crate::matrix::ObservationMatrix;
use crate::weights::neumaier_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPosterior {
    pub mean: f64,
    pub variance: f64,
}

/// Which observations pin down a missing time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Observed on both sides.
    Bridge { tau: usize, m: usize },
    /// Before the first observation.
    Leading { tau: usize },
    /// After the last observation.
    Trailing { tau: usize },
    /// Nothing observed; the posterior is the stationary law.
    Unconstrained,
}

impl BlockKind {
    pub fn label(&self) -> &'static str {
        match self {
            BlockKind::Bridge { .. } => "bridge",
            BlockKind::Leading { .. } => "leading",
            BlockKind::Trailing { .. } => "trailing",
            BlockKind::Unconstrained => "unconstrained",
        }
    }
}

/// `p(x^i | x^tau, x^m)` for `tau < i < m`.
pub fn bridge_posterior(
    params: &Ar1Params,
    tau: usize,
    m: usize,
    i: usize,
    x_tau: f64,
    x_m: f64,
) -> Result<GaussianPosterior> {
    if !(tau < i && i < m) {
        return Err(SisError::InvalidParams(format!(
            "bridge needs tau < i < m, got tau={tau}, i={i}, m={m}"
        )));
    }
    let phi = params.phi();
    let (a, b) = (i - tau, m - i);
    let (sa, sb, sc) = (
        params.geometric_sum(a),
        params.geometric_sum(b),
        params.geometric_sum(m - tau),
    );
    Ok(GaussianPosterior {
        mean: (phi.powi(b as i32) * sa * x_m + phi.powi(a as i32) * sb * x_tau) / sc,
        variance: params.sigma2() * sa * sb / sc,
    })
}

/// `p(x^i | x^tau)` with every time between them (and beyond `i`) missing.
/// Works in either direction.
pub fn tail_posterior(params: &Ar1Params, tau: usize, i: usize, x_tau: f64) -> Result<GaussianPosterior> {
    let k = tau.abs_diff(i);
    if k == 0 {
        return Err(SisError::InvalidParams("tail needs i != tau".into()));
    }
    Ok(GaussianPosterior {
        mean: params.phi().powi(k as i32) * x_tau,
        variance: params.sigma2() * params.geometric_sum(k),
    })
}

/// Posterior of the missing time `i` (0-based row) of a single-column
/// observation matrix.
pub fn posterior_for_missing(
    params: &Ar1Params,
    z: &ObservationMatrix<f64>,
    i: usize,
) -> Result<Option<(GaussianPosterior, BlockKind)>> {
    if z.cols() != 1 {
        return Err(SisError::Shape(format!("expected one column, got {}", z.cols())));
    }
    if i >= z.rows() {
        return Err(SisError::Shape(format!("row {i} outside {} rows", z.rows())));
    }
    if z.get(i, 0).is_some() {
        return Ok(None);
    }
    let before = (0..i).rev().find_map(|k| z.get(k, 0).map(|v| (k, v)));
    let after = (i + 1..z.rows()).find_map(|k| z.get(k, 0).map(|v| (k, v)));
    let out = match (before, after) {
        (Some((tau, xt)), Some((m, xm))) => (
            bridge_posterior(params, tau, m, i, xt, xm)?,
            BlockKind::Bridge { tau, m },
        ),
        (Some((tau, xt)), None) => (tail_posterior(params, tau, i, xt)?, BlockKind::Trailing { tau }),
        (None, Some((m, xm))) => (tail_posterior(params, m, i, xm)?, BlockKind::Leading { tau: m }),
        (None, None) => (
            GaussianPosterior {
                mean: 0.0,
                variance: params.stationary_variance(),
            },
            BlockKind::Unconstrained,
        ),
    };
    Ok(Some(out))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    pub ks_distance: f64,
    pub mean_error: f64,
    pub var_error: f64,
}

/// Sup distance between the weighted ECDF of `samples` and the oracle CDF,
/// plus absolute errors of the weighted mean and variance.
///
/// Weights need not be normalized; zero-weight samples are ignored.
pub fn compare_to_oracle(samples: &[(f64, f64)], oracle: &GaussianPosterior) -> Result<OracleComparison> {
    let mut sorted: Vec<(f64, f64)> = samples.iter().copied().filter(|s| s.1 > 0.0).collect();
    if sorted.is_empty() {
        return Err(SisError::Shape("no weighted samples to compare".into()));
    }
    if !(oracle.variance > 0.0) {
        return Err(SisError::InvalidParams(format!(
            "oracle variance must be positive, got {}",
            oracle.variance
        )));
    }
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = neumaier_sum(&sorted.iter().map(|s| s.1).collect::<Vec<_>>());
    let normal = Normal::new(oracle.mean, oracle.variance.sqrt())
        .map_err(|e| SisError::InvalidParams(e.to_string()))?;

    let mut ks: f64 = 0.0;
    let mut acc = 0.0;
    let mut k = 0;
    while k < sorted.len() {
        let x = sorted[k].0;
        let below = acc / total;
        while k < sorted.len() && sorted[k].0 == x {
            acc += sorted[k].1;
            k += 1;
        }
        let cdf = normal.cdf(x);
        ks = ks.max((cdf - below).abs()).max((acc / total - cdf).abs());
    }

    let mean = neumaier_sum(&sorted.iter().map(|(x, w)| x * w / total).collect::<Vec<_>>());
    let var = neumaier_sum(
        &sorted
            .iter()
            .map(|(x, w)| w / total * (x - mean) * (x - mean))
            .collect::<Vec<_>>(),
    );
    Ok(OracleComparison {
        ks_distance: ks,
        mean_error: (mean - oracle.mean).abs(),
        var_error: (var - oracle.variance).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal as Gauss};

    fn params(phi: f64) -> Ar1Params {
        Ar1Params::new(phi, 1.0, 0.2).unwrap()
    }

    #[test]
    fn independent_when_phi_is_zero() {
        let g = bridge_posterior(&params(0.0), 1, 5, 3, 4.0, -2.0).unwrap();
        assert_eq!(g.mean, 0.0);
        assert!((g.variance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bridge_hand_value() {
        let g = bridge_posterior(&params(0.5), 1, 3, 2, 1.0, 1.0).unwrap();
        assert!((g.mean - 0.8).abs() < 1e-15);
        assert!((g.variance - 0.8).abs() < 1e-15);
    }

    #[test]
    fn bridge_rejects_bad_indices() {
        assert!(bridge_posterior(&params(0.5), 2, 3, 2, 0.0, 0.0).is_err());
        assert!(bridge_posterior(&params(0.5), 1, 3, 4, 0.0, 0.0).is_err());
    }

    #[test]
    fn midpoint_symmetry() {
        let p = params(0.7);
        let a = bridge_posterior(&p, 0, 6, 3, 1.3, -0.4).unwrap();
        let b = bridge_posterior(&p, 0, 6, 3, -0.4, 1.3).unwrap();
        assert!((a.mean - b.mean).abs() < 1e-14);
    }

    #[test]
    fn tails() {
        let p = params(0.5);
        let one = tail_posterior(&p, 4, 5, 2.0).unwrap();
        assert!((one.mean - 1.0).abs() < 1e-15 && (one.variance - 1.0).abs() < 1e-15);
        let two = tail_posterior(&p, 4, 6, 2.0).unwrap();
        assert!((two.mean - 0.5).abs() < 1e-15 && (two.variance - 1.25).abs() < 1e-15);
        assert_eq!(tail_posterior(&p, 6, 4, 2.0).unwrap(), two);
    }

    #[test]
    fn classification_of_missing_rows() {
        let p = params(0.5);
        let z = ObservationMatrix::from_cells(1, vec![None, Some(1.0), None, None, Some(2.0), None]).unwrap();
        let kinds: Vec<_> = (0..6)
            .map(|i| posterior_for_missing(&p, &z, i).unwrap().map(|(_, k)| k))
            .collect();
        assert_eq!(
            kinds,
            vec![
                Some(BlockKind::Leading { tau: 1 }),
                None,
                Some(BlockKind::Bridge { tau: 1, m: 4 }),
                Some(BlockKind::Bridge { tau: 1, m: 4 }),
                None,
                Some(BlockKind::Trailing { tau: 4 }),
            ]
        );
    }

    #[test]
    fn exact_sample_has_small_ks() {
        let oracle = GaussianPosterior { mean: 0.3, variance: 2.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = Gauss::new(0.3, 2f64.sqrt()).unwrap();
        let s: Vec<_> = (0..10_000).map(|_| (d.sample(&mut rng), 1.0)).collect();
        let c = compare_to_oracle(&s, &oracle).unwrap();
        assert!(c.ks_distance < 0.03, "{c:?}");
    }

    #[test]
    fn point_mass_at_mean_has_ks_one_half() {
        let oracle = GaussianPosterior { mean: 1.0, variance: 1e-12 };
        let c = compare_to_oracle(&[(1.0, 1.0)], &oracle).unwrap();
        assert!((c.ks_distance - 0.5).abs() < 1e-9);
        assert_eq!(c.mean_error, 0.0);
    }

    #[test]
    fn shifted_sample_mean_error() {
        let oracle = GaussianPosterior { mean: 0.0, variance: 4.0 };
        let s = [(2.0 - 1.0, 0.5), (2.0 + 1.0, 0.5)];
        let c = compare_to_oracle(&s, &oracle).unwrap();
        assert!((c.mean_error - 2.0).abs() < 1e-15);
        assert!((c.var_error - 3.0).abs() < 1e-15);
    }
}
