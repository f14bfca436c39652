//! Experiment configuration: a flat JSON object whose keys mirror the
//! command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use simcorr::ar1::{Ar1Model, Ar1Params, U1Bounds};
use simcorr::invasion::{InvasionModel, InvasionParams};
use simcorr::{FilterConfig, Resampler, Scheme};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ar1,
    Invasion,
}

/// Where observations come from: `"simulate"` or a feed file path.
pub const SIMULATE: &str = "simulate";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    /// AR coefficient (ar1) or detection probability (invasion).
    #[serde(default)]
    pub phi: Option<f64>,
    #[serde(default)]
    pub sigma2: Option<f64>,
    /// Revelation probability (ar1) or expansion probability (invasion).
    #[serde(default)]
    pub theta: Option<f64>,
    /// Number of simulated steps (ar1).
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub cells: Option<usize>,
    #[serde(default)]
    pub origin: Option<usize>,
    #[serde(default)]
    pub max_time: Option<usize>,
    #[serde(default = "default_particles")]
    pub particles: usize,
    #[serde(default)]
    pub seed: u64,
    /// Seed of the simulated ground truth; defaults to `seed`.
    #[serde(default)]
    pub truth_seed: Option<u64>,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "default_resampler")]
    pub resampler: String,
    #[serde(default)]
    pub u1_lower: Option<f64>,
    #[serde(default)]
    pub u1_upper: Option<f64>,
    #[serde(default = "default_feed")]
    pub feed: String,
    /// Not echoed into manifests, so a manifest reproduces its run anywhere.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    /// Written into manifests; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code_version: Option<String>,
}

fn default_particles() -> usize {
    1000
}

fn default_scheme() -> String {
    Scheme::U2.to_string()
}

fn default_resampler() -> String {
    Resampler::Multinomial.to_string()
}

fn default_feed() -> String {
    SIMULATE.to_owned()
}

/// The model an experiment runs, with validated parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    Ar1 { model: Ar1Model, steps: usize },
    Invasion(InvasionModel),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn filter_config(&self) -> Result<FilterConfig, CliError> {
        if self.particles < 2 {
            return Err(CliError::Config(format!("particles must be at least 2, got {}", self.particles)));
        }
        let scheme: Scheme = self.scheme.parse().map_err(CliError::Config)?;
        let resampler: Resampler = self.resampler.parse().map_err(CliError::Config)?;
        Ok(FilterConfig::new(self.particles, self.seed)
            .scheme(scheme)
            .resampler(resampler))
    }

    pub fn truth_seed(&self) -> u64 {
        self.truth_seed.unwrap_or(self.seed)
    }

    pub fn simulates_feed(&self) -> bool {
        self.feed == SIMULATE
    }

    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| CliError::Config(format!("missing `{key}`")));
        match self.model {
            ModelKind::Ar1 => {
                for (key, set) in [("cells", self.cells.is_some()), ("origin", self.origin.is_some())] {
                    if set {
                        return Err(CliError::Config(format!("`{key}` does not apply to ar1")));
                    }
                }
                let params = Ar1Params::new(
                    need(self.phi, "phi")?,
                    need(self.sigma2, "sigma2")?,
                    need(self.theta, "theta")?,
                )?;
                let mut bounds = U1Bounds::stationary(&params);
                bounds.lower = self.u1_lower.unwrap_or(bounds.lower);
                bounds.upper = self.u1_upper.unwrap_or(bounds.upper);
                let steps = match (self.steps, self.simulates_feed()) {
                    (Some(s), _) if s > 0 => s,
                    (None, false) => 0,
                    _ => return Err(CliError::Config("a simulated ar1 feed needs `steps` >= 1".into())),
                };
                Ok(ModelSpec::Ar1 {
                    model: Ar1Model::with_bounds(params, bounds)?,
                    steps,
                })
            }
            ModelKind::Invasion => {
                for (key, set) in [
                    ("sigma2", self.sigma2.is_some()),
                    ("steps", self.steps.is_some()),
                    ("u1_lower", self.u1_lower.is_some()),
                    ("u1_upper", self.u1_upper.is_some()),
                ] {
                    if set {
                        return Err(CliError::Config(format!("`{key}` does not apply to invasion")));
                    }
                }
                let cells = self.cells.ok_or_else(|| CliError::Config("missing `cells`".into()))?;
                let origin = self.origin.unwrap_or(cells.div_ceil(2));
                let params = InvasionParams::new(
                    cells,
                    origin,
                    need(self.theta, "theta")?,
                    need(self.phi, "phi")?,
                    self.max_time,
                )?;
                Ok(ModelSpec::Invasion(InvasionModel::new(params)))
            }
        }
    }

    /// The configuration with every default spelled out, as echoed into
    /// manifests.
    pub fn resolved(&self) -> Result<Self, CliError> {
        let mut out = self.clone();
        out.truth_seed = Some(self.truth_seed());
        if let ModelSpec::Invasion(m) = self.model_spec()? {
            out.origin = Some(m.params.origin());
        }
        out.code_version = Some(crate::CODE_VERSION.to_owned());
        Ok(out)
    }
}
