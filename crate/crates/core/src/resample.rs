//! Proportional resampling.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Resampler {
    /// `n` independent draws proportional to the weights.
    #[default]
    Multinomial,
    /// One uniform offset and `n` evenly spaced pointers.
    Systematic,
}

impl FromStr for Resampler {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "multinomial" => Ok(Resampler::Multinomial),
            "systematic" => Ok(Resampler::Systematic),
            other => Err(format!(
                "unknown resampler `{other}` (expected multinomial or systematic)"
            )),
        }
    }
}

impl fmt::Display for Resampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Resampler::Multinomial => "multinomial",
            Resampler::Systematic => "systematic",
        })
    }
}

/// Draws `n` ancestor indices with probabilities proportional to `weights`.
/// Zero-weight entries are never selected.
pub fn resample_indices<R: Rng + ?Sized>(
    weights: &[f64],
    n: usize,
    kind: Resampler,
    rng: &mut R,
) -> Vec<usize> {
    assert!(!weights.is_empty(), "cannot resample an empty population");
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        debug_assert!(w >= 0.0, "negative weight {w}");
        acc += w;
        cumulative.push(acc);
    }
    let total = acc;
    assert!(total > 0.0, "cannot resample with zero total weight");
    let last = weights.len() - 1;
    let locate = |u: f64| cumulative.partition_point(|&c| c <= u).min(last);
    match kind {
        Resampler::Multinomial => (0..n)
            .map(|_| locate(rng.random::<f64>() * total))
            .collect(),
        Resampler::Systematic => {
            let offset: f64 = rng.random();
            (0..n)
                .map(|k| locate((offset + k as f64) / n as f64 * total))
                .collect()
        }
    }
}

/// Resamples `population` and returns the survivors, each to be given weight
/// `1/n` by the caller.
pub fn resample<T: Clone, R: Rng + ?Sized>(
    population: &[T],
    weights: &[f64],
    kind: Resampler,
    rng: &mut R,
) -> Vec<T> {
    resample_indices(weights, population.len(), kind, rng)
        .into_iter()
        .map(|j| population[j].clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn degenerate_weights_copy_one_particle() {
        let mut rng = stream(1, 1, 0);
        for kind in [Resampler::Multinomial, Resampler::Systematic] {
            let idx = resample_indices(&[1.0, 0.0, 0.0], 3, kind, &mut rng);
            assert_eq!(idx, vec![0, 0, 0]);
            let idx = resample_indices(&[0.0, 0.0, 1.0], 5, kind, &mut rng);
            assert_eq!(idx, vec![2; 5]);
        }
    }

    #[test]
    fn systematic_with_uniform_weights_is_a_permutation() {
        let mut rng = stream(3, 1, 0);
        let idx = resample_indices(&[0.1; 10], 10, Resampler::Systematic, &mut rng);
        assert_eq!(idx, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn binomial_replication_mean() {
        // weights (0.75, 0.25), n = 2: replication of particle 1 is
        // Binomial(2, 0.75), mean 1.5, sd sqrt(2 * 0.75 * 0.25).
        let trials = 100_000;
        let mut rng = stream(11, 1, 0);
        let mut total = 0usize;
        for _ in 0..trials {
            let idx = resample_indices(&[0.75, 0.25], 2, Resampler::Multinomial, &mut rng);
            total += idx.iter().filter(|&&j| j == 0).count();
        }
        let mean = total as f64 / trials as f64;
        let se = (2.0 * 0.75 * 0.25f64).sqrt() / (trials as f64).sqrt();
        assert!((mean - 1.5).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn parse_round_trip() {
        for k in [Resampler::Multinomial, Resampler::Systematic] {
            assert_eq!(k.to_string().parse::<Resampler>().unwrap(), k);
        }
    }
}
