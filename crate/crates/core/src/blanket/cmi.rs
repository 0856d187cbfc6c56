use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use super::dataset::TransitionDataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Factored,
    Coupled,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmiThresholds {
    pub tol_lo: f64,
    pub tol_hi: f64,
}

impl CmiThresholds {
    pub fn verdict(&self, cmi: f64) -> Verdict {
        if cmi < self.tol_lo {
            Verdict::Factored
        } else if cmi > self.tol_hi {
            Verdict::Coupled
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmiReport {
    /// Plug-in `I(I_{t+1}; E_t | I_t, B_t, A_t)` in nats.
    pub cmi_nats: f64,
    pub sample_count: u64,
    /// Distinct symbols of `(i_t, b_t, e_t, a_t, i_{t+1})`.
    pub alphabet_sizes: [usize; 5],
    /// Plug-in `H(I_{t+1})` and `H(E_t)`, upper bounds on the CMI.
    pub entropy_internal_next: f64,
    pub entropy_external: f64,
    pub verdict: Verdict,
}

/// `sum_k c_k ln c_k` over the marginal counts selected by `key`.
fn sum_c_ln_c<K, F>(ds: &TransitionDataset, key: F) -> f64
where
    K: Hash + Eq,
    F: Fn(&super::dataset::TransitionSymbols) -> K,
{
    let mut marginal: HashMap<K, u64> = HashMap::new();
    for (t, &c) in &ds.counts {
        *marginal.entry(key(t)).or_insert(0) += c;
    }
    // sort for a summation order that does not depend on hashing
    let mut counts: Vec<u64> = marginal.into_values().collect();
    counts.sort_unstable();
    counts.iter().map(|&c| c as f64 * (c as f64).ln()).sum()
}

/// Plug-in entropy (nats) of the marginal selected by `key`.
pub fn entropy_from_counts<K, F>(ds: &TransitionDataset, key: F) -> f64
where
    K: Hash + Eq,
    F: Fn(&super::dataset::TransitionSymbols) -> K,
{
    let n = ds.total() as f64;
    if n == 0.0 {
        return 0.0;
    }
    (n.ln() - sum_c_ln_c(ds, key) / n).max(0.0)
}

/// Maximum-likelihood CMI from the counts table via
/// `I(X;Y|Z) = H(X,Z) + H(Y,Z) - H(X,Y,Z) - H(Z)` with `X = I_{t+1}`,
/// `Y = E_t` and `Z = (I_t, B_t, A_t)`.
pub fn conditional_mi(ds: &TransitionDataset, thresholds: CmiThresholds) -> Result<CmiReport> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = ds.total() as f64;
    let xyz = sum_c_ln_c(ds, |t| (t.internal_next, t.external, t.internal, t.boundary, t.action));
    let z = sum_c_ln_c(ds, |t| (t.internal, t.boundary, t.action));
    let xz = sum_c_ln_c(ds, |t| (t.internal_next, t.internal, t.boundary, t.action));
    let yz = sum_c_ln_c(ds, |t| (t.external, t.internal, t.boundary, t.action));
    let cmi = ((xyz + z - xz - yz) / n).max(0.0);
    Ok(CmiReport {
        cmi_nats: cmi,
        sample_count: ds.total(),
        alphabet_sizes: ds.alphabet_sizes(),
        entropy_internal_next: entropy_from_counts(ds, |t| t.internal_next),
        entropy_external: entropy_from_counts(ds, |t| t.external),
        verdict: thresholds.verdict(cmi),
    })
}
