//! Exact posterior of the invasion given an observation feed.
//!
//! Contiguity reduces a state to its two fronts, so the posterior over whole
//! histories is a hidden Markov chain on `(β, γ)` pairs with the detected
//! intervals as emissions. Forward-backward recursions give every smoothed
//! marginal and the evidence.

use crate::error::{Result, SisError};
use crate::matrix::ObservationMatrix;

use super::{
    frontiers_from_observations, observation_log_density, transition_log_density, DetectionFrontier,
    InvasionParams, InvasionState,
};

/// Refusal bound on `states x times` visited by the recursions.
pub const MAX_ENUMERATION_WORK: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactPosterior {
    /// `P(x^i_m = 1 | z^t)`, indexed `[i][m]` from 0.
    pub occupancy: Vec<Vec<f64>>,
    /// Smoothed law of the fronts at each time.
    pub fronts: Vec<Vec<(InvasionState, f64)>>,
    /// `log r(z^1, ..., z^t)`.
    pub log_evidence: f64,
}

impl ExactPosterior {
    pub fn time(&self) -> usize {
        self.occupancy.len()
    }

    /// Posterior mean of the number of invaded cells at time `i` (1-based).
    pub fn expected_invaded(&self, i: usize) -> f64 {
        self.occupancy[i - 1].iter().sum()
    }
}

fn states(params: &InvasionParams) -> Vec<InvasionState> {
    let mu = params.origin();
    (1..=mu)
        .flat_map(|left| (mu..=params.cells()).map(move |right| InvasionState { left, right }))
        .collect()
}

fn successors(params: &InvasionParams, s: InvasionState) -> impl Iterator<Item = (InvasionState, f64)> + '_ {
    let rights = if s.right < params.cells() { vec![s.right, s.right + 1] } else { vec![s.right] };
    let lefts = if s.left > 1 { vec![s.left, s.left - 1] } else { vec![s.left] };
    rights.into_iter().flat_map(move |right| {
        lefts.clone().into_iter().filter_map(move |left| {
            let next = InvasionState { left, right };
            let f = transition_log_density(params, s, next).exp();
            (f > 0.0).then_some((next, f))
        })
    })
}

/// Exact smoothed occupancies given `z^t`, the last matrix of a feed.
pub fn exact_posterior(params: &InvasionParams, z: &ObservationMatrix<bool>) -> Result<ExactPosterior> {
    if z.cols() != params.cells() {
        return Err(SisError::Shape(format!(
            "observations have {} columns, the river has {} cells",
            z.cols(),
            params.cells()
        )));
    }
    let frontiers = frontiers_from_observations(z)?;
    exact_posterior_from_frontiers(params, &frontiers)
}

/// As [`exact_posterior`], from the detected interval at each time.
pub fn exact_posterior_from_frontiers(
    params: &InvasionParams,
    frontiers: &[DetectionFrontier],
) -> Result<ExactPosterior> {
    let all = states(params);
    let t = frontiers.len();
    if t == 0 {
        return Err(SisError::Shape("no observations to condition on".into()));
    }
    let work = all.len().saturating_mul(t);
    if work > MAX_ENUMERATION_WORK {
        return Err(SisError::EnumerationTooLarge {
            states: all.len(),
            times: t,
            bound: MAX_ENUMERATION_WORK,
        });
    }
    let cells = params.cells();
    let index = |s: InvasionState| (s.left - 1) * cells + (s.right - 1);
    let emission = |i: usize, s: InvasionState| -> f64 {
        if i == 0 {
            let ok = frontiers[0] == DetectionFrontier::origin(params);
            return if ok { 1.0 } else { 0.0 };
        }
        observation_log_density(params, s, frontiers[i - 1], frontiers[i]).exp()
    };

    // forward, normalized per step
    let mut alpha = vec![vec![0.0; cells * cells]; t];
    let mut log_evidence = 0.0;
    let origin = InvasionState::origin(params);
    alpha[0][index(origin)] = emission(0, origin);
    for i in 0..t {
        if i > 0 {
            let (done, rest) = alpha.split_at_mut(i);
            let prev = &done[i - 1];
            let cur = &mut rest[0];
            for &s in &all {
                let a = prev[index(s)];
                if a == 0.0 {
                    continue;
                }
                for (next, f) in successors(params, s) {
                    cur[index(next)] += a * f;
                }
            }
            for &s in &all {
                cur[index(s)] *= emission(i, s);
            }
        }
        let scale: f64 = alpha[i].iter().sum();
        if scale == 0.0 {
            return Err(SisError::InvalidParams(format!(
                "the observations at time {} have zero probability under the model",
                i + 1
            )));
        }
        log_evidence += scale.ln();
        alpha[i].iter_mut().for_each(|a| *a /= scale);
    }

    // backward, normalized per step
    let mut beta = vec![vec![0.0; cells * cells]; t];
    for &s in &all {
        beta[t - 1][index(s)] = 1.0;
    }
    for i in (0..t - 1).rev() {
        for &s in &all {
            beta[i][index(s)] = successors(params, s)
                .map(|(next, f)| f * emission(i + 1, next) * beta[i + 1][index(next)])
                .sum();
        }
        let scale: f64 = beta[i].iter().sum();
        if scale > 0.0 {
            beta[i].iter_mut().for_each(|b| *b /= scale);
        }
    }

    let mut occupancy = vec![vec![0.0; cells]; t];
    let mut fronts = Vec::with_capacity(t);
    for i in 0..t {
        let mut law: Vec<(InvasionState, f64)> = all
            .iter()
            .map(|&s| (s, alpha[i][index(s)] * beta[i][index(s)]))
            .filter(|(_, p)| *p > 0.0)
            .collect();
        let total: f64 = law.iter().map(|(_, p)| p).sum();
        for (s, p) in law.iter_mut() {
            *p /= total;
            for m in s.left..=s.right {
                occupancy[i][m - 1] += *p;
            }
        }
        fronts.push(law);
    }
    Ok(ExactPosterior {
        occupancy,
        fronts,
        log_evidence,
    })
}
