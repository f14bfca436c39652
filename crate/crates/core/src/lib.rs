//! Sequential importance sampling with deterministic corrections for Markov
//! systems observed exactly but partially.
//!
//! Particles are simulated forward from the prior, corrected so that they
//! agree with every revealed coordinate, and reweighted by the density ratio
//! of the corrected and uncorrected histories. The engine lives in
//! [`filter`]; [`ar1`] and [`invasion`] are the two bundled models, and
//! [`gold`] and [`invasion::enumerate`] provide exact posteriors to check
//! the engine against.

pub mod ar1;
pub mod error;
pub mod feed;
pub mod filter;
pub mod gold;
pub mod invasion;
pub mod matrix;
pub mod model;
pub mod particle;
pub mod resample;
pub mod rng;
pub mod summary;
pub mod weights;

pub use error::{Result, SisError};
pub use filter::{run_filter, FilterConfig, FilterOutput, ParticleFilter, StepDiagnostics};
pub use matrix::{KnowledgeMatrix, ObservationMatrix, TrajectoryMatrix};
pub use model::{Coordinate, Model, StepContext};
pub use particle::Particle;
pub use resample::Resampler;
pub use summary::MarginalSummary;
pub use weights::Scheme;
