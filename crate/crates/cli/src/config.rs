//! Experiment configuration: a JSON file mirroring the run parameters, with
//! every field defaulting to the standard two-agent setup (eta 0.1, noise
//! 0.01 per agent, Cauchy radius 0.3, 2000 inner steps voting over the final
//! 5%, sequences capped at 20 characters).

use serde::{Deserialize, Serialize};

use planchette_core::dynamics::{DynamicsConfig, Mode};
use planchette_core::energy::PotentialParams;
use planchette_core::lm::TrainMode;

use crate::corpus::Scheme;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// `"default"` or a path to a board file.
    pub board: String,
    /// `"bundled"` or a path to a `word<TAB>weight` vocabulary file.
    pub vocabulary: String,
    pub lm: LmConfig,
    pub agents: Vec<AgentConfig>,
    pub dynamics: DynamicsSection,
    pub potential: PotentialParams,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            board: "default".into(),
            vocabulary: "bundled".into(),
            lm: LmConfig::default(),
            agents: vec![
                AgentConfig { scheme: Scheme::Colorful, noise_d: 0.01 },
                AgentConfig { scheme: Scheme::Reverse, noise_d: 0.01 },
            ],
            dynamics: DynamicsSection::default(),
            potential: PotentialParams::default(),
            trials: 100,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LmConfig {
    pub order: usize,
    pub alpha: f64,
    pub train: TrainMode,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig { order: 6, alpha: 1e-3, train: TrainMode::Expectation }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub scheme: Scheme,
    pub noise_d: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub eta: f64,
    pub delta_t: usize,
    pub t_max_inner: usize,
    pub vote_fraction: f64,
    pub t_max_outer: usize,
    pub mode: Mode,
    pub continue_from_previous: bool,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        let d = DynamicsConfig::default();
        DynamicsSection {
            eta: d.eta,
            delta_t: d.delta_t,
            t_max_inner: d.t_max_inner,
            vote_fraction: d.vote_fraction,
            t_max_outer: d.t_max_outer,
            mode: d.mode,
            continue_from_previous: d.continue_from_previous,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> serde_json::Result<ExperimentConfig> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    /// The core dynamics config this experiment runs with.
    pub fn dynamics_config(&self) -> DynamicsConfig {
        DynamicsConfig {
            eta: self.dynamics.eta,
            delta_t: self.dynamics.delta_t,
            t_max_inner: self.dynamics.t_max_inner,
            vote_fraction: self.dynamics.vote_fraction,
            t_max_outer: self.dynamics.t_max_outer,
            mode: self.dynamics.mode,
            continue_from_previous: self.dynamics.continue_from_previous,
            params: self.potential,
            seed: self.seed,
        }
    }
}
