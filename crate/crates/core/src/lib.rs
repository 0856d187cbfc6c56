//! Interoceptive agents in factored worlds.
//!
//! The state of every simulated world is split into internal (physiological),
//! boundary and external parts. Rewards come from the internal state through a
//! homeostatic drive, and tabular agents adapt their exploration temperature,
//! learning gain and sub-table routing to their own internal needs. The
//! [`blanket`] module checks empirically that internal and external states only
//! interact through the boundary.

pub mod agents;
pub mod blanket;
pub mod envs;
pub mod error;
pub mod harness;
pub mod homeostat;
pub mod mdp;
pub mod rng;

pub use error::{Error, Result};
