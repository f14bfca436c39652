use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simcorr::ar1::{self, initial_sample, reveal, transition_sample, u2_log_normalizer, Ar1Model, Ar1Params};
use simcorr::weights::{partial_log_weight, KnowledgeHistory};
use simcorr::{KnowledgeMatrix, Particle, TrajectoryMatrix};

fn gauss(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// Trapezoid rule; converges geometrically for Gaussian integrands.
fn integrate(f: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi, k) = (-15.0, 15.0, 1500);
    let h = (hi - lo) / k as f64;
    (0..=k)
        .map(|j| {
            let w = if j == 0 || j == k { 0.5 } else { 1.0 };
            w * f(lo + j as f64 * h)
        })
        .sum::<f64>()
        * h
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

#[test]
fn stationary_initial_variance() {
    let n = 100_000;
    for (phi, sigma2) in [(0.5, 1.0), (0.0, 2.0)] {
        let p = Ar1Params::new(phi, sigma2, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..n).map(|_| initial_sample(&p, &mut rng)).collect();
        let v = p.stationary_variance();
        assert!((sample_variance(&xs) - v).abs() < 3.0 * v * (2.0 / n as f64).sqrt());
    }
}

#[test]
fn revelation_frequency() {
    let p = Ar1Params::new(0.5, 1.0, 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 100_000;
    let hits = (0..n).filter(|_| reveal(&p, &[false], &mut rng)[0]).count();
    let sd = (0.2 * 0.8 / n as f64).sqrt();
    assert!((hits as f64 / n as f64 - 0.2).abs() < 3.0 * sd);
}

#[test]
fn unobserved_chain_stays_stationary() {
    let p = Ar1Params::new(0.9, 1.0, 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100_000;
    let xs: Vec<f64> = (0..n)
        .map(|_| {
            let mut x = initial_sample(&p, &mut rng);
            for _ in 0..50 {
                x = transition_sample(&p, x, &mut rng);
            }
            x
        })
        .collect();
    let v = p.stationary_variance();
    assert!((sample_variance(&xs) - v).abs() < 3.0 * v * (2.0 / n as f64).sqrt());
}

#[test]
fn terminal_value_integrates_out() {
    let p = Ar1Params::new(0.6, 1.3, 0.2).unwrap();
    let a = 0.8;
    let mass = integrate(|x| gauss(x, p.phi() * a, p.sigma2()));
    assert!((mass - 1.0).abs() < 1e-9);
    assert_eq!(u2_log_normalizer(&p, &[a, 2.5], &[1]), 0.0);
}

#[test]
fn interior_value_matches_quadrature() {
    let p = Ar1Params::new(0.6, 1.3, 0.2).unwrap();
    let (a, c) = (0.8, -0.4);
    let mass = integrate(|x| gauss(x, p.phi() * a, p.sigma2()) * gauss(c, p.phi() * x, p.sigma2()));
    let n = u2_log_normalizer(&p, &[a, 9.0, c], &[1]).exp();
    assert!((n - mass).abs() < 1e-9, "{n} vs {mass}");
}

#[test]
fn two_contiguous_values_match_quadrature() {
    let p = Ar1Params::new(-0.7, 0.9, 0.2).unwrap();
    let (a, d) = (1.1, 0.3);
    let (s, phi) = (p.sigma2(), p.phi());
    let mass = integrate(|x| {
        gauss(x, phi * a, s) * integrate(|y| gauss(y, phi * x, s) * gauss(d, phi * y, s))
    });
    let n = u2_log_normalizer(&p, &[a, 5.0, 5.0, d, 0.0], &[2, 1]).exp();
    assert!((n - mass).abs() < 1e-9, "{n} vs {mass}");
}

#[test]
fn leading_run_matches_quadrature() {
    let p = Ar1Params::new(0.5, 1.0, 0.2).unwrap();
    let c = 0.9;
    let v = p.stationary_variance();
    let mass = integrate(|x| gauss(x, 0.0, v) * integrate(|y| gauss(y, 0.5 * x, 1.0) * gauss(c, 0.5 * y, 1.0)));
    let n = u2_log_normalizer(&p, &[0.0, 0.0, c], &[0, 1]).exp();
    assert!((n - mass).abs() < 1e-9, "{n} vs {mass}");
}

#[test]
fn closed_form_partial_weights_match_the_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let history = KnowledgeHistory::new(1);
    for _ in 0..500 {
        let p = Ar1Params::new(rng.random_range(-0.9..0.9), rng.random_range(0.3..2.0), 0.2).unwrap();
        let model = Ar1Model::new(p);
        let t = rng.random_range(1..8);
        let original: Vec<f64> = (0..t).map(|_| rng.random_range(-3.0..3.0)).collect();
        let corrected: Vec<f64> = original
            .iter()
            .map(|&x| if rng.random_bool(0.4) { rng.random_range(-3.0..3.0) } else { x })
            .collect();
        let particle = |xs: &[f64]| {
            Particle::new(
                TrajectoryMatrix::from_rows(1, xs.to_vec()).unwrap(),
                KnowledgeMatrix::from_bits(1, vec![false; t]).unwrap(),
            )
        };
        let (o, c) = (particle(&original), particle(&corrected));
        for i in 0..t {
            let engine = partial_log_weight(&model, &o, &c, i, &history).unwrap();
            let closed = ar1::partial_log_weight(&p, &original, &corrected, i);
            assert!((engine - closed).abs() < 1e-12, "{engine} vs {closed}");
        }
    }
}

#[test]
fn engine_partial_weight_examples() {
    let p = Ar1Params::new(0.5, 1.0, 0.2).unwrap();
    let model = Ar1Model::new(p);
    let history = KnowledgeHistory::new(1);
    let particle = |xs: Vec<f64>| {
        Particle::new(
            TrajectoryMatrix::from_rows(1, xs).unwrap(),
            KnowledgeMatrix::from_bits(1, vec![false; 2]).unwrap(),
        )
    };
    let w = partial_log_weight(&model, &particle(vec![0.0, 0.0]), &particle(vec![0.0, 1.0]), 1, &history).unwrap();
    assert!((w + 0.5).abs() < 1e-15);
    let w = partial_log_weight(&model, &particle(vec![0.0, 0.0]), &particle(vec![1.0, 0.0]), 0, &history).unwrap();
    assert!((w + 0.375).abs() < 1e-15);
}
