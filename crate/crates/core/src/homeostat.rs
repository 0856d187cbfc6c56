//! Set points, drive, homeostatic reward and viability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::InternalState;

/// Closed interval `[lo, hi]` of values compatible with survival.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveModel {
    pub set_point: Vec<f64>,
    pub weights: Vec<f64>,
    /// Per-component exponent `n`.
    #[serde(default = "default_exponent")]
    pub n: f64,
    /// Outer root `m`.
    #[serde(default = "default_exponent")]
    pub m: f64,
    pub viability: Vec<Interval>,
    pub grace_steps: u32,
}

fn default_exponent() -> f64 {
    2.0
}

impl DriveModel {
    pub fn k(&self) -> usize {
        self.set_point.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 {
            return Err(Error::config("drive model has no dimensions"));
        }
        if self.weights.len() != k || self.viability.len() != k {
            return Err(Error::config(format!(
                "drive model dims disagree: set_point {k}, weights {}, viability {}",
                self.weights.len(),
                self.viability.len()
            )));
        }
        if !(self.n >= 1.0 && self.m >= 1.0) {
            return Err(Error::config(format!(
                "drive exponents must be >= 1, got n={} m={}",
                self.n, self.m
            )));
        }
        for (i, ((&h, &w), zone)) in self
            .set_point
            .iter()
            .zip(&self.weights)
            .zip(&self.viability)
            .enumerate()
        {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::config(format!("weight {i} must be positive, got {w}")));
            }
            if !(zone.lo <= h && h <= zone.hi) {
                return Err(Error::config(format!(
                    "set point {h} of dim {i} outside viability zone [{}, {}]",
                    zone.lo, zone.hi
                )));
            }
        }
        Ok(())
    }

    fn check_dim(&self, h: &InternalState) -> Result<()> {
        if h.dim() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                got: h.dim(),
            });
        }
        Ok(())
    }

    /// Weighted deficit `w_i |h*_i - h_i|^n` for each dimension.
    fn deficits<'a>(&'a self, h: &'a InternalState) -> impl Iterator<Item = f64> + 'a {
        self.set_point
            .iter()
            .zip(&self.weights)
            .zip(&h.values)
            .map(move |((&target, &w), &x)| w * (target - x).abs().powf(self.n))
    }

    /// `d(h) = (sum_i w_i |h*_i - h_i|^n)^(1/m)`.
    pub fn drive(&self, h: &InternalState) -> Result<f64> {
        self.check_dim(h)?;
        let total: f64 = self.deficits(h).sum();
        Ok(total.powf(1.0 / self.m))
    }

    /// Reward for moving from `h_t` to `h_next`: the drop in drive.
    pub fn homeostatic_reward(&self, h_t: &InternalState, h_next: &InternalState) -> Result<f64> {
        let r = self.drive(h_t)? - self.drive(h_next)?;
        if !r.is_finite() {
            return Err(Error::NonFiniteValue(format!("homeostatic reward {r}")));
        }
        Ok(r)
    }

    pub fn in_viability(&self, h: &InternalState) -> Result<bool> {
        self.check_dim(h)?;
        Ok(self
            .viability
            .iter()
            .zip(&h.values)
            .all(|(zone, &x)| zone.contains(x)))
    }

    /// Index of the largest weighted deficit; ties go to the lowest index.
    pub fn dominant_deficit(&self, h: &InternalState) -> Result<usize> {
        self.check_dim(h)?;
        let mut best = (0, f64::NEG_INFINITY);
        for (i, v) in self.deficits(h).enumerate() {
            if v > best.1 {
                best = (i, v);
            }
        }
        Ok(best.0)
    }
}
