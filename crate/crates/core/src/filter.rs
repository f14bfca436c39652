//! The simulate-then-correct particle loop.
//!
//! Each step resamples the previous population, propagates every particle
//! with the model, corrects it against the new observation matrix, and
//! reweights the (original, corrected) pair. Per-particle work runs on rayon;
//! resampling and normalization are the synchronization points.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Result, SisError};
use crate::matrix::{KnowledgeMatrix, ObservationMatrix, TrajectoryMatrix};
use crate::model::{Coordinate, Model, StepContext};
use crate::particle::{correct_at, Particle};
use crate::resample::{resample_indices, Resampler};
use crate::rng::{stream, stream_id, StreamRng, RESAMPLE_SLOT};
use crate::summary::{summarize, MarginalSummary};
use crate::weights::{effective_sample_size, log_weight, normalize_log_weights, KnowledgeHistory, Scheme};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    pub particles: usize,
    pub seed: u64,
    pub scheme: Scheme,
    pub resampler: Resampler,
}

impl FilterConfig {
    pub fn new(particles: usize, seed: u64) -> Self {
        Self {
            particles,
            seed,
            scheme: Scheme::U2,
            resampler: Resampler::Multinomial,
        }
    }

    pub fn scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn resampler(mut self, resampler: Resampler) -> Self {
        self.resampler = resampler;
        self
    }
}

/// What the filter reports after processing time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub time: usize,
    /// ESS of the normalized weights, before resampling.
    pub ess: f64,
    /// Particles whose weight was zero after correction.
    pub discarded: usize,
    /// Weighted marginals of the newest row, one per coordinate.
    pub filtering: Vec<MarginalSummary>,
}

/// Draws row `t` of `particle` from the transition law and, unless the model
/// is missing at random, a fresh knowledge matrix from the observation law.
pub fn propagate<M: Model>(
    model: &M,
    particle: &Particle<M::Coord>,
    rng: &mut StreamRng,
) -> Result<Particle<M::Coord>> {
    let t = particle.time() + 1;
    let row = match particle.trajectory.last_row() {
        Some(prev) => model.sample_transition(prev, rng),
        None => model.sample_initial(rng),
    };
    if row.len() != model.dim() {
        return Err(SisError::ModelContract {
            time: t,
            reason: format!("sampler produced {} coordinates, expected {}", row.len(), model.dim()),
        });
    }
    let mut trajectory = particle.trajectory.clone();
    trajectory.push_row(&row);
    let knowledge = if model.missing_at_random() {
        particle.knowledge.with_row(&vec![false; model.dim()])
    } else {
        let k = model.sample_knowledge(&row, &particle.knowledge, rng);
        if k.rows() != t || k.cols() != model.dim() {
            return Err(SisError::ModelContract {
                time: t,
                reason: format!("knowledge sampler produced a {}x{} matrix", k.rows(), k.cols()),
            });
        }
        k
    };
    Ok(Particle {
        trajectory,
        knowledge: Arc::new(knowledge),
        weight: particle.weight,
        partial_log: Vec::new(),
        rng_stream: particle.rng_stream,
    })
}

/// Normalized weights for a population of (original, corrected) pairs that
/// were all corrected against `ctx.observations`.
pub fn compute_weights<M: Model>(
    model: &M,
    scheme: Scheme,
    ctx: &StepContext<'_, M::Coord>,
    pairs: &[(Particle<M::Coord>, Particle<M::Coord>)],
    history: &KnowledgeHistory,
) -> Result<Vec<f64>> {
    let log_w = pairs
        .par_iter()
        .map(|(original, corrected)| {
            log_weight(model, scheme, ctx, original, corrected, history).map(|(w, _)| w)
        })
        .collect::<Result<Vec<f64>>>()?;
    normalize_log_weights(&log_w).ok_or(SisError::ParticleCollapse { time: ctx.time })
}

/// Weighted sum of `l` over the corrected population.
pub fn estimate_expectation<C, F>(population: &[Particle<C>], weights: &[f64], l: F) -> f64
where
    C: Copy + PartialEq + Sync,
    F: Fn(&Particle<C>) -> f64 + Sync,
{
    population
        .par_iter()
        .zip(weights.par_iter())
        .map(|(p, &w)| if w > 0.0 { w * l(p) } else { 0.0 })
        .sum()
}

/// Particle filter state advanced one observation matrix at a time.
pub struct ParticleFilter<'m, M: Model> {
    model: &'m M,
    config: FilterConfig,
    population: Vec<Particle<M::Coord>>,
    weights: Vec<f64>,
    last_observation: Option<ObservationMatrix<M::Coord>>,
    history: KnowledgeHistory,
    diagnostics: Vec<StepDiagnostics>,
}

// Manual impl: the model is borrowed, so `M: Clone` is not needed.
impl<M: Model> Clone for ParticleFilter<'_, M> {
    fn clone(&self) -> Self {
        Self {
            model: self.model,
            config: self.config,
            population: self.population.clone(),
            weights: self.weights.clone(),
            last_observation: self.last_observation.clone(),
            history: self.history.clone(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

impl<'m, M: Model> ParticleFilter<'m, M> {
    pub fn new(model: &'m M, config: FilterConfig) -> Result<Self> {
        if config.particles == 0 || config.particles >= RESAMPLE_SLOT as usize {
            return Err(SisError::InvalidParams(format!(
                "particle count {} out of range",
                config.particles
            )));
        }
        Ok(Self {
            model,
            config,
            population: Vec::new(),
            weights: Vec::new(),
            last_observation: None,
            history: KnowledgeHistory::new(model.dim()),
            diagnostics: Vec::new(),
        })
    }

    /// Number of observation matrices processed so far.
    pub fn time(&self) -> usize {
        self.history.len()
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    /// Corrected particles of the latest step, weighted by [`Self::weights`].
    pub fn population(&self) -> &[Particle<M::Coord>] {
        &self.population
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn diagnostics(&self) -> &[StepDiagnostics] {
        &self.diagnostics
    }

    pub fn history(&self) -> &KnowledgeHistory {
        &self.history
    }

    /// Processes `z^t` for the next time `t`.
    pub fn step(&mut self, observation: &ObservationMatrix<M::Coord>) -> Result<&StepDiagnostics> {
        let t = self.time() + 1;
        let model = self.model;
        let n = self.config.particles;
        let seed = self.config.seed;
        let scheme = self.config.scheme;
        if observation.cols() != model.dim() {
            return Err(SisError::Shape(format!(
                "observation has {} columns, model has {}",
                observation.cols(),
                model.dim()
            )));
        }
        match &self.last_observation {
            Some(prev) => observation.check_refines(prev)?,
            None if observation.rows() != 1 => {
                return Err(SisError::Shape(format!(
                    "first observation has {} rows, expected 1",
                    observation.rows()
                )))
            }
            None => {}
        }

        let parents: Vec<usize> = if t == 1 {
            Vec::new()
        } else {
            let mut rng = stream(seed, t - 1, RESAMPLE_SLOT);
            resample_indices(&self.weights, n, self.config.resampler, &mut rng)
        };
        let root = Particle::new(TrajectoryMatrix::new(model.dim()), KnowledgeMatrix::empty(model.dim()));
        let knowledge = Arc::new(observation.knowledge());
        let newly = observation.newly_observed(self.last_observation.as_ref());
        let ctx = StepContext {
            time: t,
            observations: observation,
            previous: self.last_observation.as_ref(),
            prev_knowledge: self.history.latest(),
            newly_observed: &newly,
        };
        let history = &self.history;
        let population = &self.population;
        let inverse_n = 1.0 / n as f64;

        let stepped: Vec<(Particle<M::Coord>, f64)> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut rng = stream(seed, t, j as u32);
                let parent = if t == 1 { &root } else { &population[parents[j]] };
                let mut original = propagate(model, parent, &mut rng)?;
                original.weight = inverse_n;
                original.rng_stream = stream_id(t, j as u32);
                let mut corrected = correct_at(&original, observation, &newly, &knowledge);
                debug_assert!(corrected.is_consistent_with(observation));
                let (lw, partials) = log_weight(model, scheme, &ctx, &original, &corrected, history)?;
                corrected.partial_log = partials;
                Ok((corrected, lw))
            })
            .collect::<Result<_>>()?;

        let (mut particles, log_w): (Vec<_>, Vec<_>) = stepped.into_iter().unzip();
        let discarded = log_w.iter().filter(|w| **w == f64::NEG_INFINITY).count();
        let weights = normalize_log_weights(&log_w).ok_or(SisError::ParticleCollapse { time: t })?;
        for (p, &w) in particles.iter_mut().zip(&weights) {
            p.weight = w;
        }
        let filtering = (0..model.dim())
            .map(|m| {
                let samples: Vec<(f64, f64)> = particles
                    .iter()
                    .zip(&weights)
                    .map(|(p, &w)| (p.trajectory.get(t - 1, m).to_f64(), w))
                    .collect();
                summarize(&samples)
            })
            .collect();
        let diag = StepDiagnostics {
            time: t,
            ess: effective_sample_size(&weights),
            discarded,
            filtering,
        };

        self.population = particles;
        self.weights = weights;
        self.history.push(knowledge);
        self.last_observation = Some(observation.clone());
        self.diagnostics.push(diag);
        Ok(self.diagnostics.last().expect("just pushed"))
    }

    pub fn into_output(self) -> FilterOutput<M::Coord> {
        FilterOutput {
            config: self.config,
            steps: self.diagnostics,
            population: self.population,
            weights: self.weights,
        }
    }
}

/// Result of a complete run: per-step diagnostics and the final weighted
/// population (corrected, before any further resampling).
#[derive(Debug, Clone)]
pub struct FilterOutput<C> {
    pub config: FilterConfig,
    pub steps: Vec<StepDiagnostics>,
    pub population: Vec<Particle<C>>,
    pub weights: Vec<f64>,
}

impl<C: Coordinate> FilterOutput<C> {
    pub fn time(&self) -> usize {
        self.steps.len()
    }

    pub fn dim(&self) -> usize {
        self.population.first().map_or(0, |p| p.trajectory.cols())
    }

    /// Weighted sample of coordinate `(i, m)` (0-based row and column).
    pub fn marginal(&self, i: usize, m: usize) -> Vec<(f64, f64)> {
        self.population
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| (p.trajectory.get(i, m).to_f64(), w))
            .collect()
    }

    /// Smoothed marginal summaries for every `(row, column)` of the history.
    pub fn smoothing_summaries(&self) -> Vec<Vec<MarginalSummary>> {
        (0..self.time())
            .map(|i| (0..self.dim()).map(|m| summarize(&self.marginal(i, m))).collect())
            .collect()
    }

    pub fn estimate<F>(&self, l: F) -> f64
    where
        F: Fn(&Particle<C>) -> f64 + Sync,
    {
        estimate_expectation(&self.population, &self.weights, l)
    }
}

/// Runs the filter over a whole observation feed `z^1, ..., z^T`.
pub fn run_filter<M: Model>(
    model: &M,
    feed: &[ObservationMatrix<M::Coord>],
    config: FilterConfig,
) -> Result<FilterOutput<M::Coord>> {
    if feed.is_empty() {
        return Err(SisError::Shape("empty observation feed".into()));
    }
    let mut filter = ParticleFilter::new(model, config)?;
    for z in feed {
        filter.step(z)?;
    }
    Ok(filter.into_output())
}
