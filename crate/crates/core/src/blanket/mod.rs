//! Empirical checks that internal and external states interact only through
//! the boundary: a plug-in conditional mutual information test on sampled
//! transitions and finite-difference Jacobian blocks.

mod cmi;
mod dataset;
mod jacobian;
mod mini;

pub use cmi::{conditional_mi, entropy_from_counts, CmiReport, CmiThresholds, Verdict};
pub use dataset::{collect_transitions, random_policy, Symbolizer, TransitionDataset, TransitionSymbols};
pub use jacobian::{jacobian_sparsity, JacobianReport};
pub use mini::{calibrate_thresholds, mini_env, mini_env_dataset, mini_symbolizer, MiniInputs};
