use log::info;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::blanket::{
    collect_transitions, conditional_mi, jacobian_sparsity, random_policy, CmiReport,
    CmiThresholds, Symbolizer, Verdict,
};
use crate::envs::{HomeoGridEnv, Variant, CORE_TEMP};
use crate::error::Result;
use crate::mdp::{Action, Pos};
use crate::rng::{self, purpose};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub variant: Variant,
    pub leak: f64,
    pub cmi: CmiReport,
    /// Largest `|d i' / d e|` over every cell and action at the start state.
    pub max_internal_from_external: f64,
    /// Largest `|d e' / d i|` over the same probes.
    pub max_external_from_internal: f64,
    /// `d core' / d ambient` at the agent's cell, start cell, `Rest`.
    pub core_from_ambient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlanketReport {
    pub thresholds: CmiThresholds,
    pub samples: usize,
    pub factored: VariantReport,
    pub coupled: VariantReport,
    /// Coupled CMI over factored CMI; infinite when the factored estimate is zero.
    pub cmi_ratio: f64,
}

impl BlanketReport {
    /// Factored world judged `Factored` and the control judged `Coupled`.
    pub fn passed(&self) -> bool {
        self.factored.cmi.verdict == Verdict::Factored && self.coupled.cmi.verdict == Verdict::Coupled
    }
}

fn check_variant(
    env: &HomeoGridEnv,
    config: &ExperimentConfig,
    thresholds: CmiThresholds,
    symbolizer: &Symbolizer,
) -> Result<VariantReport> {
    let b = &config.blanket;
    let seed = config.seeds[0];
    let ds = collect_transitions(env, random_policy, b.samples, seed, symbolizer)?;
    let cmi = conditional_mi(&ds, thresholds)?;

    let probe_rng = rng::stream(seed, 0, purpose::PROBE);
    let start = env.reset(seed);
    let mut max_ie: f64 = 0.0;
    let mut max_ei: f64 = 0.0;
    let grid = &config.env.grid;
    for row in 0..grid.rows {
        for col in 0..grid.cols {
            let mut s = start.clone();
            s.external.agent_pos = Pos::new(row, col);
            for a in Action::ALL {
                let r = jacobian_sparsity(env, &s, a, b.epsilon, &probe_rng)?;
                max_ie = max_ie.max(r.max_internal_from_external);
                max_ei = max_ei.max(r.max_external_from_internal);
            }
        }
    }
    let r = jacobian_sparsity(env, &start, Action::Rest, b.epsilon, &probe_rng)?;
    let cell = start.external.cell_index(start.external.agent_pos);
    Ok(VariantReport {
        variant: env.variant(),
        leak: env.spec().dynamics.leak,
        cmi,
        max_internal_from_external: max_ie,
        max_external_from_internal: max_ei,
        core_from_ambient: r.internal_wrt_external[CORE_TEMP][cell],
    })
}

/// CMI and Jacobian checks on the configured world and on its coupled control,
/// both with the blanket's sensor noise switched on.
pub fn verify_blanket(config: &ExperimentConfig) -> Result<BlanketReport> {
    config.validate()?;
    let b = &config.blanket;
    let thresholds = CmiThresholds { tol_lo: b.tol_lo, tol_hi: b.tol_hi };
    let symbolizer = Symbolizer::new(b.discretizer.clone(), b.ambient_edges.clone())?;
    let factored_env = config.build_env()?.with_noise_std(b.sensor_noise_std)?;
    let coupled_env = factored_env.make_coupled_variant(b.coupled_leak)?;
    let factored = check_variant(&factored_env, config, thresholds, &symbolizer)?;
    let coupled = check_variant(&coupled_env, config, thresholds, &symbolizer)?;
    let cmi_ratio = coupled.cmi.cmi_nats / factored.cmi.cmi_nats;
    info!(
        "blanket: factored CMI {:.5} ({:?}), coupled CMI {:.5} ({:?})",
        factored.cmi.cmi_nats, factored.cmi.verdict, coupled.cmi.cmi_nats, coupled.cmi.verdict
    );
    Ok(BlanketReport {
        thresholds,
        samples: b.samples,
        factored,
        coupled,
        cmi_ratio: if cmi_ratio.is_nan() { 0.0 } else { cmi_ratio },
    })
}
