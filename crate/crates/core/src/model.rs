//! The contract a concrete model supplies to the particle engine.

use std::fmt::Debug;

use crate::matrix::{KnowledgeMatrix, ObservationMatrix};
use crate::particle::Particle;
use crate::rng::StreamRng;

/// A state coordinate. Summaries and estimates read it as a real number.
pub trait Coordinate: Copy + PartialEq + Send + Sync + Debug + 'static {
    fn to_f64(self) -> f64;
}

impl Coordinate for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

impl Coordinate for bool {
    fn to_f64(self) -> f64 {
        if self {
            1.0
        } else {
            0.0
        }
    }
}

/// Everything the auxiliary densities need to know about the current
/// correction step.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a, C> {
    /// Current time `t` (1-based).
    pub time: usize,
    /// `z^t`.
    pub observations: &'a ObservationMatrix<C>,
    /// `z^{t-1}`, absent at `t = 1`.
    pub previous: Option<&'a ObservationMatrix<C>>,
    /// Knowledge implied by `z^{t-1}` (no rows at `t = 1`).
    pub prev_knowledge: &'a KnowledgeMatrix,
    /// Coordinates `(row, col)` revealed by `z^t` and unknown in `z^{t-1}`.
    pub newly_observed: &'a [(usize, usize)],
}

/// A Markov system observed exactly but partially.
///
/// The engine simulates states with `f` (transition) and, unless the model is
/// missing at random, knowledge with `g` (observation process); it then
/// corrects both against the observations and reweights with the log
/// densities below. The auxiliary density over the fiber of uncorrected
/// states is supplied through [`Model::u1_log_density`] or
/// [`Model::u2_log_normalizer`].
pub trait Model: Sync {
    type Coord: Coordinate;

    /// Number of coordinates per time step.
    fn dim(&self) -> usize;

    /// When true the knowledge process is independent of the state, so the
    /// engine neither simulates it nor includes `g` in the weights.
    fn missing_at_random(&self) -> bool {
        true
    }

    fn sample_initial(&self, rng: &mut StreamRng) -> Vec<Self::Coord>;

    fn sample_transition(&self, prev: &[Self::Coord], rng: &mut StreamRng) -> Vec<Self::Coord>;

    /// `log f(x^1)`.
    fn initial_log_density(&self, state: &[Self::Coord]) -> f64;

    /// `log f(x^t | x^{t-1})`. May be `-inf`, never `+inf`.
    fn transition_log_density(&self, prev: &[Self::Coord], cur: &[Self::Coord]) -> f64;

    /// Draws `b^t` given `x^t` and `b^{t-1}`; the result has one more row than
    /// `prev`. Only called when the model is not missing at random.
    fn sample_knowledge(
        &self,
        _state: &[Self::Coord],
        prev: &KnowledgeMatrix,
        _rng: &mut StreamRng,
    ) -> KnowledgeMatrix {
        prev.with_row(&vec![false; self.dim()])
    }

    /// `log g(b^t | x^t, b^{t-1})`.
    fn observation_log_density(
        &self,
        _state: &[Self::Coord],
        _prev: &KnowledgeMatrix,
        _cur: &KnowledgeMatrix,
    ) -> f64 {
        0.0
    }

    /// `log u1(y | y')` up to a constant shared by every particle at this
    /// step; `-inf` when the uncorrected particle lies outside the support.
    fn u1_log_density(
        &self,
        ctx: &StepContext<'_, Self::Coord>,
        original: &Particle<Self::Coord>,
        corrected: &Particle<Self::Coord>,
    ) -> f64;

    /// `log N_j`: the prior mass of the fiber of `corrected`, restricted to
    /// the factors of the affected time indices (see
    /// [`crate::weights::affected_rows`]). Factors outside that set cancel
    /// between the numerator and `N_j`.
    fn u2_log_normalizer(
        &self,
        ctx: &StepContext<'_, Self::Coord>,
        corrected: &Particle<Self::Coord>,
    ) -> f64;
}
