//! Partial weights, auxiliary schemes and log-space normalization.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Result, SisError};
use crate::matrix::{KnowledgeMatrix, TrajectoryMatrix};
use crate::model::{Model, StepContext};
use crate::particle::Particle;

/// Choice of auxiliary density over the fiber of uncorrected states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Uniform on a bounded subset of the fiber; weights are products of
    /// partial density ratios.
    U1,
    /// The prior restricted to the fiber; weights are `(1/N_j) Π v_ij`.
    U2,
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "u1" => Ok(Scheme::U1),
            "u2" => Ok(Scheme::U2),
            other => Err(format!("unknown scheme `{other}` (expected u1 or u2)")),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::U1 => "u1",
            Scheme::U2 => "u2",
        })
    }
}

/// Knowledge matrices `b'^1, ..., b'^{t-1}` fixed by earlier observations.
#[derive(Debug, Clone)]
pub struct KnowledgeHistory {
    empty: KnowledgeMatrix,
    steps: Vec<Arc<KnowledgeMatrix>>,
}

impl KnowledgeHistory {
    pub fn new(cols: usize) -> Self {
        Self {
            empty: KnowledgeMatrix::empty(cols),
            steps: Vec::new(),
        }
    }

    pub fn push(&mut self, knowledge: Arc<KnowledgeMatrix>) {
        self.steps.push(knowledge);
    }

    /// Number of completed time steps.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `b^time`; time 0 is the empty matrix.
    pub fn at(&self, time: usize) -> &KnowledgeMatrix {
        if time == 0 {
            &self.empty
        } else {
            &self.steps[time - 1]
        }
    }

    pub fn latest(&self) -> &KnowledgeMatrix {
        self.at(self.steps.len())
    }
}

/// `log f` of row `i` given row `i - 1` (the initial law at `i = 0`).
pub fn row_log_f<M: Model>(model: &M, x: &TrajectoryMatrix<M::Coord>, i: usize) -> f64 {
    if i == 0 {
        model.initial_log_density(x.row(0))
    } else {
        model.transition_log_density(x.row(i - 1), x.row(i))
    }
}

/// `log g(b^{i+1} | x^{i+1}, b^i)` for row `i` of `particle`. Rows before the
/// particle's last one read their knowledge from `history`.
fn row_log_g<M: Model>(
    model: &M,
    particle: &Particle<M::Coord>,
    i: usize,
    history: &KnowledgeHistory,
) -> f64 {
    let last = particle.time() - 1;
    let cur = if i == last {
        particle.knowledge.as_ref()
    } else {
        history.at(i + 1)
    };
    model.observation_log_density(particle.trajectory.row(i), history.at(i), cur)
}

fn row_changed<C: PartialEq + Copy>(a: &Particle<C>, b: &Particle<C>, i: usize) -> bool {
    a.trajectory.row(i) != b.trajectory.row(i)
}

/// Log of the partial weight `w_ij`: the ratio of `f` (and, when the model
/// is not missing at random, `g`) between the corrected and the original
/// history at row `i`. Exactly zero when neither row `i` nor row `i - 1`
/// was altered by the correction.
pub fn partial_log_weight<M: Model>(
    model: &M,
    original: &Particle<M::Coord>,
    corrected: &Particle<M::Coord>,
    i: usize,
    history: &KnowledgeHistory,
) -> Result<f64> {
    let t = original.time();
    let mar = model.missing_at_random();
    let knowledge_changed = !mar && i + 1 == t && original.knowledge != corrected.knowledge;
    let changed = row_changed(original, corrected, i)
        || (i > 0 && row_changed(original, corrected, i - 1))
        || knowledge_changed;
    if !changed {
        return Ok(0.0);
    }
    let mut num = row_log_f(model, &corrected.trajectory, i);
    let mut den = row_log_f(model, &original.trajectory, i);
    if !mar {
        num += row_log_g(model, corrected, i, history);
        den += row_log_g(model, original, i, history);
    }
    if den.is_nan() || den == f64::NEG_INFINITY || num.is_nan() || num == f64::INFINITY {
        return Err(SisError::ModelContract {
            time: t,
            reason: format!(
                "partial weight at row {} has numerator {num} and denominator {den}",
                i + 1
            ),
        });
    }
    Ok(num - den)
}

/// Log of the alternative partial weight `v_ij = f(x'^i | x'^{i-1}) g(...)`.
pub fn partial_log_v<M: Model>(
    model: &M,
    corrected: &Particle<M::Coord>,
    i: usize,
    history: &KnowledgeHistory,
) -> f64 {
    let mut v = row_log_f(model, &corrected.trajectory, i);
    if !model.missing_at_random() {
        v += row_log_g(model, corrected, i, history);
    }
    v
}

/// Rows whose partial weight can differ from one at time `t`: rows holding a
/// newly observed coordinate, their successors, and (for models that
/// simulate knowledge) the newest row.
pub fn affected_rows(newly_observed: &[(usize, usize)], t: usize, missing_at_random: bool) -> Vec<usize> {
    let mut rows = BTreeSet::new();
    for &(i, _) in newly_observed {
        rows.insert(i);
        if i + 1 < t {
            rows.insert(i + 1);
        }
    }
    if !missing_at_random && t > 0 {
        rows.insert(t - 1);
    }
    rows.into_iter().collect()
}

/// Unnormalized log weight of one (original, corrected) pair, together with
/// the partial terms it was built from.
pub fn log_weight<M: Model>(
    model: &M,
    scheme: Scheme,
    ctx: &StepContext<'_, M::Coord>,
    original: &Particle<M::Coord>,
    corrected: &Particle<M::Coord>,
    history: &KnowledgeHistory,
) -> Result<(f64, Vec<(usize, f64)>)> {
    let rows = affected_rows(ctx.newly_observed, ctx.time, model.missing_at_random());
    match scheme {
        Scheme::U1 => {
            let log_u = model.u1_log_density(ctx, original, corrected);
            if log_u == f64::NEG_INFINITY {
                return Ok((f64::NEG_INFINITY, Vec::new()));
            }
            let mut total = log_u;
            let mut partials = Vec::with_capacity(rows.len());
            for i in rows {
                let w = partial_log_weight(model, original, corrected, i, history)?;
                total += w;
                partials.push((i, w));
            }
            Ok((total, partials))
        }
        Scheme::U2 => {
            let log_n = model.u2_log_normalizer(ctx, corrected);
            if !log_n.is_finite() {
                // A fiber of zero (or undefined) prior mass cannot contain the
                // sampled particle; treat it as a collapse rather than guess.
                return Err(SisError::ParticleCollapse { time: ctx.time });
            }
            let mut total = -log_n;
            let mut partials = Vec::with_capacity(rows.len());
            for i in rows {
                let v = partial_log_v(model, corrected, i, history);
                total += v;
                partials.push((i, v));
            }
            Ok((total, partials))
        }
    }
}

/// Log ratio of the complete prior products `h(y') / h(y)`, evaluated over
/// every row with no sparsity shortcut.
pub fn full_history_log_ratio<M: Model>(
    model: &M,
    original: &Particle<M::Coord>,
    corrected: &Particle<M::Coord>,
    history: &KnowledgeHistory,
) -> f64 {
    let mar = model.missing_at_random();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..original.time() {
        num += row_log_f(model, &corrected.trajectory, i);
        den += row_log_f(model, &original.trajectory, i);
        if !mar {
            num += row_log_g(model, corrected, i, history);
            den += row_log_g(model, original, i, history);
        }
    }
    num - den
}

/// Sparse counterpart of [`full_history_log_ratio`]: sums partial weights over
/// the affected rows only.
pub fn sparse_log_ratio<M: Model>(
    model: &M,
    original: &Particle<M::Coord>,
    corrected: &Particle<M::Coord>,
    newly_observed: &[(usize, usize)],
    history: &KnowledgeHistory,
) -> Result<f64> {
    affected_rows(newly_observed, original.time(), model.missing_at_random())
        .into_iter()
        .map(|i| partial_log_weight(model, original, corrected, i, history))
        .sum()
}

/// Normalizes log weights by subtracting the maximum before exponentiating.
/// Returns `None` when every weight is zero.
pub fn normalize_log_weights(log_weights: &[f64]) -> Option<Vec<f64>> {
    let max = log_weights
        .iter()
        .copied()
        .filter(|w| !w.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let raw: Vec<f64> = log_weights.iter().map(|&w| (w - max).exp()).collect();
    let total = neumaier_sum(&raw);
    Some(raw.into_iter().map(|w| w / total).collect())
}

/// `1 / Σ w_j²` for normalized weights.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    1.0 / neumaier_sum(&weights.iter().map(|w| w * w).collect::<Vec<_>>())
}

pub(crate) fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}
