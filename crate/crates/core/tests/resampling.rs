use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simcorr::resample::resample_indices;
use simcorr::Resampler;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn uniform_multinomial_counts_pass_chi_square() {
    let n = 20;
    let w = vec![1.0 / n as f64; n];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trials = 10_000;
    // per-trial replication counts of particle 0 follow Binomial(n, 1/n)
    let mut hist = vec![0u64; n + 1];
    for _ in 0..trials {
        let c = resample_indices(&w, n, Resampler::Multinomial, &mut rng)
            .iter()
            .filter(|&&j| j == 0)
            .count();
        hist[c] += 1;
    }
    let p = 1.0 / n as f64;
    let binom = |k: usize| -> f64 {
        let mut c = 1.0;
        for i in 0..k {
            c *= (n - i) as f64 / (i + 1) as f64;
        }
        c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
    };
    // pool the sparse upper tail into one cell
    let (mut stat, mut tail_obs, mut tail_exp, mut cells) = (0.0, 0.0, 0.0, 0);
    for (k, &obs) in hist.iter().enumerate() {
        let expected = trials as f64 * binom(k);
        if k < 4 {
            stat += (obs as f64 - expected).powi(2) / expected;
            cells += 1;
        } else {
            tail_obs += obs as f64;
            tail_exp += expected;
        }
    }
    stat += (tail_obs - tail_exp).powi(2) / tail_exp;
    cells += 1;
    let crit = ChiSquared::new((cells - 1) as f64).unwrap().inverse_cdf(0.999);
    assert!(stat < crit, "{stat} >= {crit}");
}

#[test]
fn mean_replication_matches_weight() {
    let w = [0.75, 0.25];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let trials = 100_000;
    let total: usize = (0..trials)
        .map(|_| resample_indices(&w, 2, Resampler::Multinomial, &mut rng).iter().filter(|&&j| j == 0).count())
        .sum();
    let mean = total as f64 / trials as f64;
    // Binomial(2, 0.75): sd sqrt(2 * 0.75 * 0.25)
    let se = (2.0 * 0.75 * 0.25 / trials as f64).sqrt();
    assert!((mean - 1.5).abs() < 3.0 * se, "{mean}");
}
