//! Tabular agents: observation binning, Q-tables with softmax selection,
//! neuromodulation of temperature and TD gain, and the four agent kinds.

mod agent;
mod discretize;
mod neuromod;
mod qtable;

pub use agent::{Agent, AgentConfig, AgentKind, Decision, LearnRecord};
pub use discretize::{Discretizer, DiscretizerSpec, ObsKey};
pub use neuromod::{modulate, ModulationSignals, NeuromodConfig};
pub use qtable::{entropy, softmax_probs, QTable, Transition};
