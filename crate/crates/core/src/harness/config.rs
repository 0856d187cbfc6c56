use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{AgentConfig, AgentKind, Discretizer, DiscretizerSpec, NeuromodConfig};
use crate::envs::{homeogrid_s_drive, EnvSpec, HomeoGridEnv, INTERNAL_DIMS};
use crate::error::{Error, Result};
use crate::homeostat::DriveModel;

/// Settings for the Markov-blanket verification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlanketConfig {
    /// CMI below this (nats) is a `Factored` verdict.
    pub tol_lo: f64,
    /// CMI above this (nats) is a `Coupled` verdict.
    pub tol_hi: f64,
    pub samples: usize,
    /// Thermal sensor noise used while collecting transitions. Without noise the
    /// boundary is a deterministic copy of the ambient field and a leak is invisible.
    pub sensor_noise_std: f64,
    pub coupled_leak: f64,
    pub epsilon: f64,
    /// Binning of internal variables for the independence test.
    pub discretizer: DiscretizerSpec,
    /// Bin edges for sensed and raw ambient temperature.
    pub ambient_edges: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    pub drive: DriveModel,
    pub agent: AgentConfig,
    pub neuromod: NeuromodConfig,
    pub train_steps: u64,
    pub eval_steps: u64,
    pub seeds: Vec<u64>,
    /// Keep learning online while evaluating.
    #[serde(default = "yes")]
    pub learn_during_eval: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub blanket: BlanketConfig,
}

fn yes() -> bool {
    true
}

impl ExperimentConfig {
    /// HomeoGrid-S with a homeostatic Q-learner and 20 seeds.
    pub fn homeogrid_s() -> Self {
        ExperimentConfig {
            env: EnvSpec::homeogrid_s(),
            drive: homeogrid_s_drive(),
            agent: AgentConfig {
                kind: AgentKind::HomeostaticQ,
                alpha: 0.2,
                gamma: 0.95,
                tau: 0.005,
                discretizer: DiscretizerSpec {
                    internal_edges: vec![
                        vec![0.5, 0.7],
                        vec![0.5, 0.7],
                        vec![36.5, 37.5],
                    ],
                    use_internal: true,
                    use_position: true,
                    use_tag: false,
                    use_ingestion: true,
                    season_visible: false,
                },
            },
            neuromod: NeuromodConfig {
                tau_min: 0.005,
                tau_max: 0.03,
                beta_tau: 3.0,
                beta_g: 1.0,
                context_gating: true,
            },
            train_steps: 300_000,
            eval_steps: 1_500,
            seeds: (0..20).collect(),
            learn_during_eval: true,
            output_dir: None,
            blanket: BlanketConfig {
                tol_lo: 0.022_722_718_372_469_55,
                tol_hi: 0.113_613_591_862_347_76,
                samples: 100_000,
                sensor_noise_std: 0.5,
                coupled_leak: 0.2,
                epsilon: 1e-4,
                discretizer: DiscretizerSpec {
                    internal_edges: vec![vec![], vec![], vec![36.0, 36.5, 37.0, 37.5, 38.0]],
                    use_internal: true,
                    use_position: false,
                    use_tag: false,
                    use_ingestion: false,
                    season_visible: false,
                },
                ambient_edges: vec![36.0, 36.5, 37.0, 37.5, 38.0],
            },
        }
    }

    pub fn with_kind(&self, kind: AgentKind) -> Self {
        let mut cfg = self.clone();
        cfg.agent.kind = kind;
        if kind == AgentKind::ExternalRewardQ {
            // the conventional baseline has no interoceptive access
            cfg.agent.discretizer.use_internal = false;
        }
        cfg
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_env(&self) -> Result<HomeoGridEnv> {
        HomeoGridEnv::new(self.env.clone(), self.drive.clone())
    }

    pub fn validate(&self) -> Result<()> {
        self.build_env()?;
        self.agent.validate()?;
        self.neuromod.validate()?;
        Discretizer::new(self.agent.discretizer.clone())?;
        let k = self.drive.k();
        if self.agent.discretizer.internal_edges.len() != k {
            return Err(Error::config(format!(
                "agent discretizer has {} internal dims, drive model {k}",
                self.agent.discretizer.internal_edges.len()
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seed list must be non-empty"));
        }
        if self.eval_steps == 0 {
            return Err(Error::config("eval_steps must be >= 1"));
        }
        let b = &self.blanket;
        if !(b.tol_lo >= 0.0 && b.tol_lo <= b.tol_hi) {
            return Err(Error::config("blanket thresholds need 0 <= tol_lo <= tol_hi"));
        }
        if b.samples == 0 {
            return Err(Error::config("blanket samples must be >= 1"));
        }
        if !(b.epsilon > 0.0) || !(b.coupled_leak > 0.0) || !(b.sensor_noise_std >= 0.0) {
            return Err(Error::config("blanket epsilon and leak must be > 0, noise >= 0"));
        }
        Discretizer::new(b.discretizer.clone())?;
        if b.discretizer.internal_edges.len() != INTERNAL_DIMS {
            return Err(Error::config("blanket discretizer must cover every internal dim"));
        }
        if b.ambient_edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("ambient edges must be strictly increasing"));
        }
        Ok(())
    }
}
