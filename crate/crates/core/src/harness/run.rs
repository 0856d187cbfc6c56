use log::debug;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::agents::{Agent, AgentKind};
use crate::envs::{HomeoGridEnv, Status, ViabilityTracker};
use crate::error::Result;
use crate::mdp::{step_factored, Action, FactoredState, InternalState, Pos, Tag};
use crate::rng::{self, SimRng};

/// One evaluation step. State fields describe the state *after* the step;
/// decision fields describe how the action was chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub pos: Pos,
    pub season: usize,
    pub internal: Vec<f64>,
    pub action: Action,
    /// Homeostatic reward `d(h_t) - d(h_{t+1})`, whatever the agent learns from.
    pub reward: f64,
    pub drive: f64,
    pub in_viability: bool,
    pub tau: f64,
    pub context_id: usize,
    pub entropy: f64,
    /// TD error of the Q update, absent when no update happened.
    pub td_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub seed: u64,
    pub agent: AgentKind,
    pub start: Pos,
    pub initial_drive: f64,
    pub records: Vec<StepRecord>,
    pub status: Status,
}

impl EpisodeLog {
    /// Drive before each decision, aligned with `records`.
    pub fn drive_before(&self) -> Vec<f64> {
        std::iter::once(self.initial_drive)
            .chain(self.records.iter().map(|r| r.drive))
            .take(self.records.len())
            .collect()
    }

    /// Position at each decision, aligned with `records`.
    pub fn pos_before(&self) -> Vec<Pos> {
        std::iter::once(self.start)
            .chain(self.records.iter().map(|r| r.pos))
            .take(self.records.len())
            .collect()
    }
}

/// Agent and world for one seed, with independent random streams.
pub struct Runner {
    pub env: HomeoGridEnv,
    pub agent: Agent,
    pub seed: u64,
    env_rng: SimRng,
    agent_rng: SimRng,
}

impl Runner {
    pub fn new(config: &ExperimentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let env = config.build_env()?;
        let agent = Agent::new(config.agent.clone(), config.neuromod.clone(), config.drive.clone())?;
        let run_id = config.agent.kind as u64;
        Ok(Self {
            env,
            agent,
            seed,
            env_rng: rng::stream(seed, run_id, rng::purpose::ENV),
            agent_rng: rng::stream(seed, run_id, rng::purpose::AGENT),
        })
    }

    /// Continual training. On death the agent respawns at the start cell while
    /// the season clock keeps running.
    pub fn train(&mut self, steps: u64) -> Result<u64> {
        let grace = self.env.drive().grace_steps;
        let mut s = self.env.reset(self.seed);
        let mut tracker = ViabilityTracker::default();
        let mut deaths = 0;
        for step in 0..steps {
            let (next, status, _) = self.step(&s, &mut tracker, grace, true).map_err(|e| e.at_step(step))?;
            if status == Status::Dead {
                deaths += 1;
                s = self.env.respawn(self.seed, next.t);
                tracker = ViabilityTracker::default();
            } else {
                s = next;
            }
        }
        debug!("seed {} trained {steps} steps, {deaths} deaths", self.seed);
        Ok(deaths)
    }

    fn step(
        &mut self,
        s: &FactoredState,
        tracker: &mut ViabilityTracker,
        grace: u32,
        learn: bool,
    ) -> Result<(FactoredState, Status, StepRecord)> {
        let decision = self.agent.select(s, &mut self.agent_rng)?;
        let next = step_factored(&self.env, s, decision.action, &mut self.env_rng)?;
        let drive = self.env.drive();
        let viable = drive.in_viability(&next.internal)?;
        let status = tracker.push(viable, grace);
        let td_error = if learn {
            self.agent
                .learn(s, &decision, &next, status == Status::Dead)?
                .map(|l| l.td_error)
        } else {
            None
        };
        let record = StepRecord {
            t: s.t,
            pos: next.external.agent_pos,
            season: next.external.season,
            internal: next.internal.values.clone(),
            action: decision.action,
            reward: drive.homeostatic_reward(&s.internal, &next.internal)?,
            drive: drive.drive(&next.internal)?,
            in_viability: viable,
            tau: decision.tau,
            context_id: decision.context_id,
            entropy: decision.entropy,
            td_error,
        };
        Ok((next, status, record))
    }

    /// Evaluation episode from `start`, stopping at death or after `steps`.
    pub fn evaluate_from(&mut self, start: FactoredState, steps: u64, learn: bool) -> Result<EpisodeLog> {
        let grace = self.env.drive().grace_steps;
        let mut tracker = ViabilityTracker::default();
        let mut records = Vec::with_capacity(steps as usize);
        let initial_drive = self.env.drive().drive(&start.internal)?;
        let start_pos = start.external.agent_pos;
        let mut s = start;
        let mut status = Status::Alive;
        for step in 0..steps {
            let (next, st, record) = self.step(&s, &mut tracker, grace, learn).map_err(|e| e.at_step(step))?;
            records.push(record);
            status = st;
            if st == Status::Dead {
                break;
            }
            s = next;
        }
        Ok(EpisodeLog {
            seed: self.seed,
            agent: self.agent.kind(),
            start: start_pos,
            initial_drive,
            records,
            status,
        })
    }

    pub fn evaluate(&mut self, steps: u64, learn: bool) -> Result<EpisodeLog> {
        let start = self.env.reset(self.seed);
        self.evaluate_from(start, steps, learn)
    }

    /// Walks from the start cell with a custom internal state until the agent
    /// stands on a food or water cell. No learning happens during the probe.
    pub fn first_resource(&mut self, internal: InternalState, max_steps: u64) -> Result<Option<Tag>> {
        let mut s = self.env.reset_with_internal(self.seed, internal);
        let mut probe_rng = rng::stream(self.seed, self.agent.kind() as u64, rng::purpose::PROBE);
        for step in 0..max_steps {
            let tag = s.external.tag_under_agent();
            if tag.is_resource() {
                return Ok(Some(tag));
            }
            let decision = self.agent.select(&s, &mut probe_rng).map_err(|e| e.at_step(step))?;
            s = step_factored(&self.env, &s, decision.action, &mut probe_rng).map_err(|e| e.at_step(step))?;
        }
        Ok(None)
    }
}

/// Trains then evaluates one agent for `seed`.
pub fn run(config: &ExperimentConfig, seed: u64) -> Result<EpisodeLog> {
    let mut runner = Runner::new(config, seed)?;
    runner.train(config.train_steps)?;
    runner.evaluate(config.eval_steps, config.learn_during_eval)
}
