use rand::Rng;
use serde::{Deserialize, Serialize};

use super::discretize::{Discretizer, DiscretizerSpec, ObsKey};
use super::neuromod::{modulate, NeuromodConfig};
use super::qtable::{entropy, sample, softmax_probs, QTable, Transition};
use crate::error::{Error, Result};
use crate::homeostat::DriveModel;
use crate::mdp::{Action, FactoredState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentKind {
    /// Uniform random actions, no learning.
    Random,
    /// Conventional baseline: +1 for consuming on any resource cell, blind to the internal state.
    ExternalRewardQ,
    /// Q-learning on drive reduction at a fixed temperature.
    HomeostaticQ,
    /// Homeostatic Q-learning with drive-modulated temperature, TD gain and context gating.
    Neuromod,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Random => "random",
            AgentKind::ExternalRewardQ => "external_q",
            AgentKind::HomeostaticQ => "homeostatic_q",
            AgentKind::Neuromod => "neuromod",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub kind: AgentKind,
    pub alpha: f64,
    pub gamma: f64,
    /// Fixed softmax temperature for the non-modulated learners.
    pub tau: f64,
    pub discretizer: DiscretizerSpec,
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(Error::config(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::config(format!("tau must be > 0, got {}", self.tau)));
        }
        Ok(())
    }
}

/// What the agent chose and under which modulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub obs: ObsKey,
    pub tau: f64,
    pub td_gain: f64,
    pub context_id: usize,
    /// Entropy of the action distribution the action was drawn from.
    pub entropy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnRecord {
    pub reward: f64,
    pub td_error: f64,
}

#[derive(Clone, Debug)]
pub struct Agent {
    cfg: AgentConfig,
    neuromod: NeuromodConfig,
    drive: DriveModel,
    discretizer: Discretizer,
    tables: Vec<QTable>,
}

impl Agent {
    pub fn new(cfg: AgentConfig, neuromod: NeuromodConfig, drive: DriveModel) -> Result<Self> {
        cfg.validate()?;
        neuromod.validate()?;
        drive.validate()?;
        let discretizer = Discretizer::new(cfg.discretizer.clone())?;
        if cfg.discretizer.use_internal && discretizer.dims() != drive.k() {
            return Err(Error::config(format!(
                "discretizer has edges for {} internal dims, drive model has {}",
                discretizer.dims(),
                drive.k()
            )));
        }
        let n_tables = if cfg.kind == AgentKind::Neuromod && neuromod.context_gating {
            drive.k()
        } else {
            1
        };
        Ok(Self {
            tables: vec![QTable::new(Action::COUNT); n_tables],
            cfg,
            neuromod,
            drive,
            discretizer,
        })
    }

    pub fn kind(&self) -> AgentKind {
        self.cfg.kind
    }

    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    pub fn tables(&self) -> &[QTable] {
        &self.tables
    }

    pub fn discretizer(&self) -> &Discretizer {
        &self.discretizer
    }

    pub fn observe(&self, s: &FactoredState) -> ObsKey {
        self.discretizer.key(s)
    }

    /// Temperature, TD gain and table index for state `s`.
    fn signals(&self, s: &FactoredState) -> Result<(f64, f64, usize)> {
        match self.cfg.kind {
            AgentKind::Neuromod => {
                let m = modulate(&self.neuromod, &self.drive, &s.internal)?;
                Ok((m.tau, m.td_gain, m.context_id))
            }
            _ => Ok((self.cfg.tau, 1.0, 0)),
        }
    }

    /// Action distribution the agent would sample from in `s`.
    pub fn policy(&self, s: &FactoredState) -> Result<Vec<f64>> {
        if self.cfg.kind == AgentKind::Random {
            return Ok(vec![1.0 / Action::COUNT as f64; Action::COUNT]);
        }
        let (tau, _, ctx) = self.signals(s)?;
        Ok(softmax_probs(&self.tables[ctx].values(self.observe(s)), tau))
    }

    pub fn select<R: Rng + ?Sized>(&self, s: &FactoredState, rng: &mut R) -> Result<Decision> {
        let obs = self.observe(s);
        let (tau, td_gain, context_id) = self.signals(s)?;
        let probs = if self.cfg.kind == AgentKind::Random {
            vec![1.0 / Action::COUNT as f64; Action::COUNT]
        } else {
            softmax_probs(&self.tables[context_id].values(obs), tau)
        };
        Ok(Decision {
            action: Action::ALL[sample(&probs, rng)],
            obs,
            tau,
            td_gain,
            context_id,
            entropy: entropy(&probs),
        })
    }

    /// Reward the agent's learning rule sees for `s --action--> next`.
    pub fn reward(&self, s: &FactoredState, action: Action, next: &FactoredState) -> Result<f64> {
        match self.cfg.kind {
            AgentKind::Random => Ok(0.0),
            AgentKind::ExternalRewardQ => {
                let on_resource = s.external.tag_under_agent().is_resource();
                Ok(if action == Action::Consume && on_resource { 1.0 } else { 0.0 })
            }
            AgentKind::HomeostaticQ | AgentKind::Neuromod => {
                self.drive.homeostatic_reward(&s.internal, &next.internal)
            }
        }
    }

    /// TD update for the step just taken. `None` for the random agent.
    pub fn learn(
        &mut self,
        s: &FactoredState,
        decision: &Decision,
        next: &FactoredState,
        terminal: bool,
    ) -> Result<Option<LearnRecord>> {
        if self.cfg.kind == AgentKind::Random {
            return Ok(None);
        }
        let reward = self.reward(s, decision.action, next)?;
        let tr = Transition {
            obs: decision.obs,
            action: decision.action.index(),
            reward,
            next_obs: self.observe(next),
            terminal,
        };
        let td_error = self.tables[decision.context_id].update(
            &tr,
            self.cfg.alpha,
            self.cfg.gamma,
            decision.td_gain,
        )?;
        Ok(Some(LearnRecord { reward, td_error }))
    }
}
