use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::Runner;
use crate::envs::{ENERGY, HYDRATION};
use crate::error::Result;
use crate::mdp::{InternalState, Tag};

/// Internal level of the starved variable in the goal-switch probe.
pub const PROBE_LOW: f64 = 0.35;
/// Internal level of the other variable, close to its set point.
pub const PROBE_HIGH: f64 = 0.75;
pub const PROBE_MAX_STEPS: u64 = 100;

/// First resource reached by one trained agent under two opposite deficits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalSwitchOutcome {
    pub seed: u64,
    pub hungry_first: Option<Tag>,
    pub thirsty_first: Option<Tag>,
}

impl GoalSwitchOutcome {
    pub fn hungry_correct(&self) -> bool {
        self.hungry_first == Some(Tag::Food)
    }

    pub fn thirsty_correct(&self) -> bool {
        self.thirsty_first == Some(Tag::Water)
    }
}

/// Trains the configured agent for `seed`, then releases it from the start
/// cell once with an energy deficit and once with a hydration deficit.
pub fn goal_switch_probe(config: &ExperimentConfig, seed: u64) -> Result<GoalSwitchOutcome> {
    let mut runner = Runner::new(config, seed)?;
    runner.train(config.train_steps)?;
    let mut hungry = config.drive.set_point.clone();
    hungry[ENERGY] = PROBE_LOW;
    hungry[HYDRATION] = PROBE_HIGH;
    let mut thirsty = config.drive.set_point.clone();
    thirsty[ENERGY] = PROBE_HIGH;
    thirsty[HYDRATION] = PROBE_LOW;
    Ok(GoalSwitchOutcome {
        seed,
        hungry_first: runner.first_resource(InternalState::new(hungry), PROBE_MAX_STEPS)?,
        thirsty_first: runner.first_resource(InternalState::new(thirsty), PROBE_MAX_STEPS)?,
    })
}
