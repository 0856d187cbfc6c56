use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{step_factored, Action, FactoredState, TransitionModel};

/// Central-difference sensitivities across the blanket with the boundary held fixed.
///
/// External coordinates are the per-cell ambient temperatures followed by the
/// sensor-noise realisation; internal coordinates are the internal variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianReport {
    /// `d i_{t+1}[r] / d e_t[c]`, one row per internal output.
    pub internal_wrt_external: Vec<Vec<f64>>,
    /// `d e_{t+1}[r] / d i_t[c]`, one row per external output.
    pub external_wrt_internal: Vec<Vec<f64>>,
    pub max_internal_from_external: f64,
    pub max_external_from_internal: f64,
}

impl JacobianReport {
    /// Largest absolute entry over both forbidden blocks.
    pub fn forbidden_max(&self) -> f64 {
        self.max_internal_from_external.max(self.max_external_from_internal)
    }
}

fn external_coords(s: &FactoredState) -> Vec<f64> {
    let mut v = s.external.ambient.clone();
    v.push(s.external.sensor_noise);
    v
}

fn set_external_coord(s: &mut FactoredState, idx: usize, value: f64) {
    if idx < s.external.ambient.len() {
        s.external.ambient[idx] = value;
    } else {
        s.external.sensor_noise = value;
    }
}

fn max_abs(block: &[Vec<f64>]) -> f64 {
    block.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteValue("dynamics at a perturbed point".into()))
    }
}

/// Every evaluation steps a clone of `rng`, so the external map sees the same draws.
pub fn jacobian_sparsity<M, R>(
    model: &M,
    state: &FactoredState,
    action: Action,
    epsilon: f64,
    rng: &R,
) -> Result<JacobianReport>
where
    M: TransitionModel + ?Sized,
    R: Rng + Clone,
{
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::config(format!("epsilon must be > 0, got {epsilon}")));
    }
    let eval = |s: &FactoredState| -> Result<FactoredState> {
        let next = step_factored(model, s, action, &mut rng.clone())?;
        check_finite(&next.internal.values)?;
        check_finite(&external_coords(&next))?;
        Ok(next)
    };

    let ext = external_coords(state);
    let k = state.internal.dim();
    let mut internal_wrt_external = vec![vec![0.0; ext.len()]; k];
    for (c, &x) in ext.iter().enumerate() {
        let mut plus = state.clone();
        let mut minus = state.clone();
        set_external_coord(&mut plus, c, x + epsilon);
        set_external_coord(&mut minus, c, x - epsilon);
        let (p, m) = (eval(&plus)?, eval(&minus)?);
        for (r, row) in internal_wrt_external.iter_mut().enumerate() {
            row[c] = (p.internal.values[r] - m.internal.values[r]) / (2.0 * epsilon);
        }
    }

    let mut external_wrt_internal = vec![vec![0.0; k]; ext.len()];
    for c in 0..k {
        let mut plus = state.clone();
        let mut minus = state.clone();
        plus.internal.values[c] += epsilon;
        minus.internal.values[c] -= epsilon;
        let (p, m) = (external_coords(&eval(&plus)?), external_coords(&eval(&minus)?));
        for (r, row) in external_wrt_internal.iter_mut().enumerate() {
            row[c] = (p[r] - m[r]) / (2.0 * epsilon);
        }
    }

    Ok(JacobianReport {
        max_internal_from_external: max_abs(&internal_wrt_external),
        max_external_from_internal: max_abs(&external_wrt_internal),
        internal_wrt_external,
        external_wrt_internal,
    })
}
