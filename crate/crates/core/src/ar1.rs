//! Stationary Gaussian AR(1) process with Bernoulli revelation of missing
//! values.
//!
//! The revelation process is independent of the state, so the engine runs
//! it missing-at-random: knowledge is never simulated and `g` never enters
//! the weights.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SisError};
use crate::matrix::{ObservationMatrix, TrajectoryMatrix};
use crate::model::{Model, StepContext};
use crate::particle::Particle;
use crate::rng::StreamRng;

/// `x^t = phi x^{t-1} + eps`, `eps ~ N(0, sigma2)`; each missing value is
/// revealed with probability `theta` per step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Params {
    phi: f64,
    sigma2: f64,
    theta: f64,
}

impl Ar1Params {
    pub fn new(phi: f64, sigma2: f64, theta: f64) -> Result<Self> {
        if !(phi.abs() < 1.0) {
            return Err(SisError::InvalidParams(format!(
                "stationarity requires |phi| < 1, got {phi}"
            )));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(SisError::InvalidParams(format!("sigma2 must be positive, got {sigma2}")));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(SisError::InvalidParams(format!("theta must lie in [0, 1], got {theta}")));
        }
        Ok(Self { phi, sigma2, theta })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `sigma2 / (1 - phi^2)`.
    pub fn stationary_variance(&self) -> f64 {
        self.sigma2 / (1.0 - self.phi * self.phi)
    }

    /// `Σ_{j<k} phi^{2j}`, in closed form.
    pub fn geometric_sum(&self, k: usize) -> f64 {
        let r = self.phi * self.phi;
        if r == 0.0 {
            return if k == 0 { 0.0 } else { 1.0 };
        }
        (1.0 - r.powi(k as i32)) / (1.0 - r)
    }
}

fn normal_log_density(x: f64, mean: f64, variance: f64) -> f64 {
    -0.5 * (2.0 * PI * variance).ln() - (x - mean) * (x - mean) / (2.0 * variance)
}

/// Draw from the stationary law `N(0, sigma2 / (1 - phi^2))`.
pub fn initial_sample<R: Rng + ?Sized>(params: &Ar1Params, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z * params.stationary_variance().sqrt()
}

pub fn transition_sample<R: Rng + ?Sized>(params: &Ar1Params, prev: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    params.phi * prev + z * params.sigma2.sqrt()
}

pub fn initial_log_density(params: &Ar1Params, x: f64) -> f64 {
    normal_log_density(x, 0.0, params.stationary_variance())
}

/// `log N(cur; phi prev, sigma2)`.
pub fn transition_log_density(params: &Ar1Params, prev: f64, cur: f64) -> f64 {
    normal_log_density(cur, params.phi * prev, params.sigma2)
}

/// Each unrevealed entry of `bits` is revealed independently with
/// probability theta; revealed entries stay revealed.
pub fn reveal<R: Rng + ?Sized>(params: &Ar1Params, bits: &[bool], rng: &mut R) -> Vec<bool> {
    bits.iter()
        .map(|&b| b || rng.random::<f64>() < params.theta)
        .collect()
}

/// Closed-form log partial weight for row `i` (0-based): the stationary
/// ratio at the first time, the transition ratio afterwards. Normalizing
/// constants cancel, leaving only the quadratic forms.
pub fn partial_log_weight(params: &Ar1Params, original: &[f64], corrected: &[f64], i: usize) -> f64 {
    let unchanged = original[i] == corrected[i] && (i == 0 || original[i - 1] == corrected[i - 1]);
    if unchanged {
        return 0.0;
    }
    let (phi, s2) = (params.phi, params.sigma2);
    if i == 0 {
        -(1.0 - phi * phi) / (2.0 * s2) * (corrected[0].powi(2) - original[0].powi(2))
    } else {
        let new = corrected[i] - phi * corrected[i - 1];
        let old = original[i] - phi * original[i - 1];
        -(new * new - old * old) / (2.0 * s2)
    }
}

/// `log N_j` for the prior restricted to the fiber of `corrected`.
///
/// The newly observed rows split into maximal runs `[s, e]`. Integrating the
/// free pre-correction values of a run out of its factors
/// `f(x^s | x^{s-1}) ... f(x^{e+1} | x^e)` leaves the `(e - s + 2)`-step
/// transition density from `x^{s-1}` to `x^{e+1}`: the stationary density
/// when the run starts at the first time, and one when it reaches the
/// newest time.
pub fn u2_log_normalizer(params: &Ar1Params, corrected: &[f64], newly_rows: &[usize]) -> f64 {
    let t = corrected.len();
    let mut rows: Vec<usize> = newly_rows.to_vec();
    rows.sort_unstable();
    rows.dedup();
    let mut total = 0.0;
    let mut k = 0;
    while k < rows.len() {
        let s = rows[k];
        let mut e = s;
        while k + 1 < rows.len() && rows[k + 1] == e + 1 {
            k += 1;
            e += 1;
        }
        k += 1;
        if e + 1 >= t {
            continue;
        }
        let next = corrected[e + 1];
        total += if s == 0 {
            normal_log_density(next, 0.0, params.stationary_variance())
        } else {
            let steps = e - s + 2;
            normal_log_density(
                next,
                params.phi.powi(steps as i32) * corrected[s - 1],
                params.sigma2 * params.geometric_sum(steps),
            )
        };
    }
    total
}

/// Per-coordinate bounds of the u1 hyper-rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct U1Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl U1Bounds {
    /// `±8` stationary standard deviations around zero.
    pub fn stationary(params: &Ar1Params) -> Self {
        let half = 8.0 * params.stationary_variance().sqrt();
        Self {
            lower: -half,
            upper: half,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lower..=self.upper).contains(&x)
    }
}

/// The AR(1) model as seen by the engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Model {
    pub params: Ar1Params,
    pub bounds: U1Bounds,
}

impl Ar1Model {
    pub fn new(params: Ar1Params) -> Self {
        Self {
            params,
            bounds: U1Bounds::stationary(&params),
        }
    }

    pub fn with_bounds(params: Ar1Params, bounds: U1Bounds) -> Result<Self> {
        if !(bounds.lower < bounds.upper) {
            return Err(SisError::InvalidParams(format!(
                "u1 bounds [{}, {}] are empty",
                bounds.lower, bounds.upper
            )));
        }
        Ok(Self { params, bounds })
    }
}

impl Model for Ar1Model {
    type Coord = f64;

    fn dim(&self) -> usize {
        1
    }

    fn sample_initial(&self, rng: &mut StreamRng) -> Vec<f64> {
        vec![initial_sample(&self.params, rng)]
    }

    fn sample_transition(&self, prev: &[f64], rng: &mut StreamRng) -> Vec<f64> {
        vec![transition_sample(&self.params, prev[0], rng)]
    }

    fn initial_log_density(&self, state: &[f64]) -> f64 {
        initial_log_density(&self.params, state[0])
    }

    fn transition_log_density(&self, prev: &[f64], cur: &[f64]) -> f64 {
        transition_log_density(&self.params, prev[0], cur[0])
    }

    fn u1_log_density(&self, ctx: &StepContext<'_, f64>, original: &Particle<f64>, _: &Particle<f64>) -> f64 {
        let inside = ctx
            .newly_observed
            .iter()
            .all(|&(i, m)| self.bounds.contains(original.trajectory.get(i, m)));
        if inside {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    fn u2_log_normalizer(&self, ctx: &StepContext<'_, f64>, corrected: &Particle<f64>) -> f64 {
        let rows: Vec<usize> = ctx.newly_observed.iter().map(|&(i, _)| i).collect();
        u2_log_normalizer(&self.params, corrected.trajectory.cells(), &rows)
    }
}

/// A simulated ground truth and the observation feed it generates.
#[derive(Debug, Clone, PartialEq)]
pub struct Ar1Truth {
    pub trajectory: Vec<f64>,
    pub feed: Vec<ObservationMatrix<f64>>,
}

impl Ar1Truth {
    pub fn trajectory_matrix(&self) -> TrajectoryMatrix<f64> {
        TrajectoryMatrix::from_rows(1, self.trajectory.clone()).expect("one column")
    }
}

/// Simulates `steps` values of the process and the cumulative revelation
/// feed `z^1, ..., z^steps`.
pub fn simulate_truth(params: &Ar1Params, steps: usize, seed: u64) -> Ar1Truth {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trajectory = Vec::with_capacity(steps);
    let mut bits: Vec<bool> = Vec::with_capacity(steps);
    let mut feed = Vec::with_capacity(steps);
    for t in 0..steps {
        let x = match trajectory.last() {
            None => initial_sample(params, &mut rng),
            Some(&prev) => transition_sample(params, prev, &mut rng),
        };
        trajectory.push(x);
        bits.push(false);
        bits = reveal(params, &bits, &mut rng);
        let cells = (0..=t).map(|i| bits[i].then_some(trajectory[i])).collect();
        feed.push(ObservationMatrix::from_cells(1, cells).expect("one column"));
    }
    Ar1Truth { trajectory, feed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn params(phi: f64) -> Ar1Params {
        Ar1Params::new(phi, 1.0, 0.2).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(Ar1Params::new(1.0, 1.0, 0.2).is_err());
        assert!(Ar1Params::new(-1.2, 1.0, 0.2).is_err());
        assert!(Ar1Params::new(0.5, 0.0, 0.2).is_err());
        assert!(Ar1Params::new(0.5, 1.0, 1.5).is_err());
        assert!(Ar1Params::new(f64::NAN, 1.0, 0.5).is_err());
        assert!(Ar1Params::new(-0.99, 2.0, 0.0).is_ok());
    }

    #[test]
    fn stationary_sd_closed_form() {
        let p = Ar1Params::new(0.9, 1.0, 0.2).unwrap();
        assert!((p.stationary_variance().sqrt() - 2.294157338705618).abs() < 1e-12);
        assert!((Ar1Params::new(0.0, 2.5, 0.1).unwrap().stationary_variance() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn transition_density_values() {
        let p = params(0.5);
        let mode = transition_log_density(&p, 2.0, 1.0);
        assert!((mode + 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
        let v = transition_log_density(&p, 0.0, 1.0);
        assert!((v - (-0.5 * (2.0 * PI).ln() - 0.5)).abs() < 1e-15);
        assert_eq!(transition_log_density(&p, 0.0, 1.7), transition_log_density(&p, 0.0, -1.7));
    }

    #[test]
    fn closed_form_partial_weights() {
        let p = params(0.5);
        assert_eq!(partial_log_weight(&p, &[0.0, 0.0], &[0.0, 0.0], 1), 0.0);
        assert!((partial_log_weight(&p, &[0.0, 0.0], &[0.0, 1.0], 1) + 0.5).abs() < 1e-15);
        assert!((partial_log_weight(&p, &[0.0], &[1.0], 0) + 0.375).abs() < 1e-15);
    }

    #[test]
    fn geometric_sums() {
        let p = params(0.5);
        assert_eq!(p.geometric_sum(0), 0.0);
        assert!((p.geometric_sum(1) - 1.0).abs() < 1e-15);
        assert!((p.geometric_sum(2) - 1.25).abs() < 1e-15);
        assert!((p.geometric_sum(3) - 1.3125).abs() < 1e-15);
        assert_eq!(params(0.0).geometric_sum(4), 1.0);
    }

    #[test]
    fn u2_normalizer_edge_cases() {
        let p = params(0.5);
        // nothing newly observed: empty product
        assert_eq!(u2_log_normalizer(&p, &[0.1, 0.2, 0.3], &[]), 0.0);
        // terminal coordinate: the free value integrates to one
        assert_eq!(u2_log_normalizer(&p, &[0.1, 0.2, 0.3], &[2]), 0.0);
        // a run covering everything also integrates to one
        assert_eq!(u2_log_normalizer(&p, &[0.1, 0.2], &[0, 1]), 0.0);
        // leading run: stationary density of the next value
        let lead = u2_log_normalizer(&p, &[0.1, 0.7], &[0]);
        assert!((lead - initial_log_density(&p, 0.7)).abs() < 1e-15);
    }

    #[test]
    fn revelation_extremes() {
        let mut rng = stream(3, 1, 0);
        let p0 = Ar1Params::new(0.5, 1.0, 0.0).unwrap();
        let p1 = Ar1Params::new(0.5, 1.0, 1.0).unwrap();
        let bits = [true, false, false];
        assert_eq!(reveal(&p0, &bits, &mut rng), bits.to_vec());
        assert_eq!(reveal(&p1, &bits, &mut rng), vec![true; 3]);
    }

    #[test]
    fn simulated_feed_is_monotone() {
        let p = params(0.5);
        let truth = simulate_truth(&p, 40, 9);
        assert_eq!(truth.feed.len(), 40);
        crate::matrix::check_feed(&truth.feed).unwrap();
        let last = truth.feed.last().unwrap();
        for (i, x) in truth.trajectory.iter().enumerate() {
            if let Some(z) = last.get(i, 0) {
                assert_eq!(z, *x);
            }
        }
    }
}
