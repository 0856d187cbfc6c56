use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homeostat::DriveModel;
use crate::mdp::InternalState;

/// Maps internal drive onto learning hyperparameters.
///
/// Temperature falls from `tau_max` toward the floor `tau_min` as drive grows:
/// `tau(d) = tau_min + (tau_max - tau_min) * exp(-beta_tau * d)`, so a satiated
/// agent explores and a needy one exploits. The TD gain saturates upward,
/// `g(d) = 1 + beta_g * d / (1 + d)`, amplifying learning while in deficit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuromodConfig {
    pub tau_min: f64,
    pub tau_max: f64,
    pub beta_tau: f64,
    pub beta_g: f64,
    /// Route learning to one sub-table per dominant deficit.
    pub context_gating: bool,
}

impl NeuromodConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_min > 0.0 && self.tau_min < self.tau_max && self.tau_max.is_finite()) {
            return Err(Error::config(format!(
                "need 0 < tau_min < tau_max, got {} and {}",
                self.tau_min, self.tau_max
            )));
        }
        if !(self.beta_tau > 0.0 && self.beta_tau.is_finite()) {
            return Err(Error::config("beta_tau must be > 0"));
        }
        if !(self.beta_g >= 0.0 && self.beta_g.is_finite()) {
            return Err(Error::config("beta_g must be >= 0"));
        }
        Ok(())
    }

    pub fn temperature(&self, drive: f64) -> f64 {
        self.tau_min + (self.tau_max - self.tau_min) * (-self.beta_tau * drive).exp()
    }

    pub fn td_gain(&self, drive: f64) -> f64 {
        1.0 + self.beta_g * drive / (1.0 + drive)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationSignals {
    pub tau: f64,
    pub td_gain: f64,
    pub context_id: usize,
}

pub fn modulate(cfg: &NeuromodConfig, dm: &DriveModel, h: &InternalState) -> Result<ModulationSignals> {
    let d = dm.drive(h)?;
    let context_id = if cfg.context_gating {
        dm.dominant_deficit(h)?
    } else {
        0
    };
    Ok(ModulationSignals {
        tau: cfg.temperature(d),
        td_gain: cfg.td_gain(d),
        context_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homeostat::Interval;

    fn cfg() -> NeuromodConfig {
        NeuromodConfig {
            tau_min: 0.05,
            tau_max: 1.0,
            beta_tau: 1.0,
            beta_g: 2.0,
            context_gating: true,
        }
    }

    fn dm() -> DriveModel {
        DriveModel {
            set_point: vec![0.0, 0.0],
            weights: vec![1.0, 1.0],
            n: 2.0,
            m: 2.0,
            viability: vec![Interval { lo: -100.0, hi: 100.0 }; 2],
            grace_steps: 0,
        }
    }

    #[test]
    fn satiated_agent_explores_at_full_temperature() {
        let s = modulate(&cfg(), &dm(), &InternalState::new(vec![0.0, 0.0])).unwrap();
        assert_eq!(s.tau, 1.0);
        assert_eq!(s.td_gain, 1.0);
        assert_eq!(s.context_id, 0);
    }

    #[test]
    fn limits_at_large_drive() {
        let c = cfg();
        assert!((c.temperature(1e6) - 0.05).abs() < 1e-12);
        assert!((c.td_gain(1e12) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn unit_drive_temperature() {
        // 0.05 + 0.95 / e
        let s = modulate(&cfg(), &dm(), &InternalState::new(vec![0.6, 0.8])).unwrap();
        assert!((s.tau - 0.399_485_469_112_870_2).abs() < 1e-9);
        assert!((s.tau - 0.3995).abs() < 1e-4);
        assert_eq!(s.context_id, 1);
    }

    #[test]
    fn context_is_zero_without_gating() {
        let mut c = cfg();
        c.context_gating = false;
        let s = modulate(&c, &dm(), &InternalState::new(vec![0.0, 3.0])).unwrap();
        assert_eq!(s.context_id, 0);
    }

    #[test]
    fn monotone_in_drive() {
        let c = cfg();
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        for w in grid.windows(2) {
            assert!(c.temperature(w[1]) < c.temperature(w[0]));
            assert!(c.td_gain(w[1]) >= c.td_gain(w[0]));
        }
    }

    #[test]
    fn validation() {
        let mut c = cfg();
        assert!(c.validate().is_ok());
        c.tau_min = 2.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.beta_tau = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.beta_g = -1.0;
        assert!(c.validate().is_err());
    }
}
