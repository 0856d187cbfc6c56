use std::collections::HashMap;

use rand::Rng;

use super::discretize::ObsKey;
use crate::error::{Error, Result};

/// One observed step, in table coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub obs: ObsKey,
    pub action: usize,
    pub reward: f64,
    pub next_obs: ObsKey,
    /// No bootstrap from `next_obs` when set.
    pub terminal: bool,
}

/// Action values keyed by observation. Unseen observations read as zero.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    n_actions: usize,
    rows: HashMap<ObsKey, Vec<f64>>,
}

impl QTable {
    pub fn new(n_actions: usize) -> Self {
        assert!(n_actions > 0, "a Q-table needs at least one action");
        Self {
            n_actions,
            rows: HashMap::new(),
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Number of observations with stored values.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn values(&self, obs: ObsKey) -> Vec<f64> {
        self.rows
            .get(&obs)
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.n_actions])
    }

    pub fn value(&self, obs: ObsKey, action: usize) -> f64 {
        self.rows.get(&obs).map_or(0.0, |row| row[action])
    }

    pub fn set(&mut self, obs: ObsKey, action: usize, value: f64) {
        let n = self.n_actions;
        self.rows.entry(obs).or_insert_with(|| vec![0.0; n])[action] = value;
    }

    pub fn max_value(&self, obs: ObsKey) -> f64 {
        match self.rows.get(&obs) {
            Some(row) => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            None => 0.0,
        }
    }

    /// Greedy action; ties go to the lowest index.
    pub fn greedy(&self, obs: ObsKey) -> usize {
        argmax(&self.values(obs))
    }

    /// Samples from the softmax of `Q(obs, .) / tau`.
    pub fn select<R: Rng + ?Sized>(&self, obs: ObsKey, tau: f64, rng: &mut R) -> usize {
        let probs = softmax_probs(&self.values(obs), tau);
        sample(&probs, rng)
    }

    /// TD backup `Q(s,a) += alpha * gain * (r + gamma * max Q(s',.) - Q(s,a))`.
    /// Returns the TD error before scaling.
    pub fn update(&mut self, tr: &Transition, alpha: f64, gamma: f64, gain: f64) -> Result<f64> {
        let bootstrap = if tr.terminal { 0.0 } else { self.max_value(tr.next_obs) };
        let current = self.value(tr.obs, tr.action);
        let td = tr.reward + gamma * bootstrap - current;
        let updated = current + alpha * gain * td;
        if !updated.is_finite() {
            return Err(Error::NonFiniteValue(format!(
                "Q update to {updated} (reward {}, td {td})",
                tr.reward
            )));
        }
        self.set(tr.obs, tr.action, updated);
        Ok(td)
    }

    /// Equality on stored bit patterns.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.n_actions == other.n_actions
            && self.rows.len() == other.rows.len()
            && self.rows.iter().all(|(k, row)| {
                other.rows.get(k).is_some_and(|o| {
                    row.iter().zip(o).all(|(a, b)| a.to_bits() == b.to_bits())
                })
            })
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Softmax of `values / tau` with max subtraction.
pub fn softmax_probs(values: &[f64], tau: f64) -> Vec<f64> {
    debug_assert!(tau > 0.0);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = values.iter().map(|v| ((v - max) / tau).exp()).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    probs
}

/// Shannon entropy in nats.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

pub(crate) fn sample<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left acc slightly below 1
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}
