use serde::{Deserialize, Serialize};

use super::cmi::{conditional_mi, CmiThresholds};
use super::dataset::{Symbolizer, TransitionDataset, TransitionSymbols};
use crate::agents::DiscretizerSpec;
use crate::envs::{
    homeogrid_s_drive, Dynamics, EnvSpec, GridSpec, HomeoGridEnv, Placement, SeasonSchedule,
    SeasonSpec, CORE_TEMP,
};
use crate::error::{Error, Result};
use crate::mdp::{
    step_factored, Action, BoundaryState, FactoredState, Flux, InternalState, Pos, Tag,
    TransitionModel,
};
use crate::rng;

/// Design of the exactly enumerated mini-environment: a 1x2 strip whose two
/// cells sit at `cold` and `warm` degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiniInputs {
    pub cold: f64,
    pub warm: f64,
    /// Core temperatures enumerated at time t.
    pub cores: Vec<f64>,
    /// Sensor noise realisations enumerated for the boundary at time t.
    pub noise: Vec<f64>,
}

impl Default for MiniInputs {
    fn default() -> Self {
        Self {
            cold: 36.5,
            warm: 37.5,
            cores: vec![36.9, 37.1],
            noise: vec![-0.3, 0.3],
        }
    }
}

impl MiniInputs {
    fn validate(&self) -> Result<()> {
        if !(self.cold < self.warm) {
            return Err(Error::config("mini env needs cold < warm"));
        }
        if self.cores.is_empty() || self.noise.is_empty() {
            return Err(Error::config("mini env needs at least one core value and one noise value"));
        }
        Ok(())
    }
}

/// The mini-environment, coupled with coefficient `leak` when it is positive.
pub fn mini_env(inputs: &MiniInputs, leak: f64) -> Result<HomeoGridEnv> {
    inputs.validate()?;
    let base = EnvSpec::homeogrid_s();
    let spec = EnvSpec {
        grid: GridSpec {
            rows: 1,
            cols: 2,
            start: Pos::new(0, 0),
            seasons: vec![SeasonSpec {
                resources: vec![
                    Placement { row: 0, col: 0, tag: Tag::Food },
                    Placement { row: 0, col: 1, tag: Tag::Water },
                ],
                ambient_baseline: (inputs.cold + inputs.warm) / 2.0,
            }],
            ambient_gradient: inputs.warm - inputs.cold,
            shade_offset: 0.0,
            noise_std: 0.0,
        },
        schedule: SeasonSchedule { period: 1, order: vec![0] },
        dynamics: Dynamics { leak: 0.0, ..base.dynamics },
    };
    let env = HomeoGridEnv::new(spec, homeogrid_s_drive())?;
    if leak > 0.0 {
        env.make_coupled_variant(leak)
    } else {
        Ok(env)
    }
}

/// Core temperature and ambient split at the midpoint: two symbols each.
pub fn mini_symbolizer(inputs: &MiniInputs) -> Result<Symbolizer> {
    let mid = (inputs.cold + inputs.warm) / 2.0;
    Symbolizer::new(
        DiscretizerSpec {
            internal_edges: vec![vec![], vec![], vec![mid]],
            use_internal: true,
            use_position: false,
            use_tag: false,
            use_ingestion: false,
            season_visible: false,
        },
        vec![mid],
    )
}

/// Exact joint over a uniform design: every combination of core temperature,
/// previous cell, sensor noise, current cell and action has weight one.
/// The current cell is drawn independently of everything the boundary saw.
pub fn mini_env_dataset(inputs: &MiniInputs, leak: f64) -> Result<TransitionDataset> {
    let env = mini_env(inputs, leak)?;
    let sym = mini_symbolizer(inputs)?;
    let template = env.reset(0);
    let field = env.ambient_field(0).to_vec();
    let mut rng = rng::stream(0, 0, rng::purpose::BLANKET);
    let mut ds = TransitionDataset::default();
    for &core in &inputs.cores {
        for &prev_ambient in &field {
            for &noise in &inputs.noise {
                for col in 0..2 {
                    for action in Action::ALL {
                        let mut s: FactoredState = template.clone();
                        let mut values = env.drive().set_point.clone();
                        values[CORE_TEMP] = core;
                        s.internal = InternalState::new(values);
                        s.boundary = BoundaryState {
                            sensed_ambient: prev_ambient + noise,
                            ingestion: Flux::default(),
                        };
                        s.external.agent_pos = Pos::new(0, col);
                        let next = step_factored(env.transition_maps(), &s, action, &mut rng)?;
                        ds.push_weighted(TransitionSymbols::of(&sym, &s, action, &next.internal), 1);
                    }
                }
            }
        }
    }
    debug_assert_eq!(env.schema().cols, 2);
    Ok(ds)
}

/// Thresholds read off the exact mini-environment: `tol_hi` is a quarter of the
/// CMI a leak of `leak` produces there and `tol_lo` a fifth of `tol_hi`. Fails if
/// the factored mini-environment is not exactly independent.
pub fn calibrate_thresholds(inputs: &MiniInputs, leak: f64) -> Result<CmiThresholds> {
    let probe = CmiThresholds { tol_lo: 0.0, tol_hi: 0.0 };
    let factored = conditional_mi(&mini_env_dataset(inputs, 0.0)?, probe)?.cmi_nats;
    let coupled = conditional_mi(&mini_env_dataset(inputs, leak)?, probe)?.cmi_nats;
    if factored > 1e-12 {
        return Err(Error::config(format!("factored mini env shows CMI {factored}")));
    }
    if !(coupled > 0.0) {
        return Err(Error::config(format!("leak {leak} is invisible in the mini env")));
    }
    let tol_hi = coupled / 4.0;
    Ok(CmiThresholds { tol_lo: tol_hi / 5.0, tol_hi })
}
