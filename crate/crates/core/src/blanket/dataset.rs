use std::collections::HashMap;

use crate::agents::{Discretizer, DiscretizerSpec};
use crate::envs::{HomeoGridEnv, ViabilityTracker, Status};
use crate::error::{Error, Result};
use crate::mdp::{step_factored, Action, BoundaryState, ExternalState, FactoredState, InternalState};
use crate::rng::{self, SimRng};
use rand::Rng;

/// Maps each blanket component to a small integer alphabet.
#[derive(Clone, Debug)]
pub struct Symbolizer {
    internal: Discretizer,
    ambient_edges: Vec<f64>,
}

impl Symbolizer {
    pub fn new(internal: DiscretizerSpec, ambient_edges: Vec<f64>) -> Result<Self> {
        if ambient_edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("ambient edges must be strictly increasing"));
        }
        Ok(Self {
            internal: Discretizer::new(internal)?,
            ambient_edges,
        })
    }

    fn ambient_bin(&self, x: f64) -> u64 {
        self.ambient_edges.partition_point(|&e| e <= x) as u64
    }

    pub fn internal(&self, i: &InternalState) -> u64 {
        self.internal.internal_symbol(&i.values)
    }

    /// Sensed-temperature bin and which fluxes are non-zero.
    pub fn boundary(&self, b: &BoundaryState) -> u64 {
        let flux = u64::from(b.ingestion.food > 0.0) * 2 + u64::from(b.ingestion.water > 0.0);
        self.ambient_bin(b.sensed_ambient) * 4 + flux
    }

    /// Raw ambient-temperature bin under the agent.
    pub fn external(&self, e: &ExternalState) -> u64 {
        self.ambient_bin(e.ambient_under_agent())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TransitionSymbols {
    pub internal: u64,
    pub boundary: u64,
    pub external: u64,
    pub action: u64,
    pub internal_next: u64,
}

impl TransitionSymbols {
    pub fn of(sym: &Symbolizer, s: &FactoredState, action: Action, next: &InternalState) -> Self {
        Self {
            internal: sym.internal(&s.internal),
            boundary: sym.boundary(&s.boundary),
            external: sym.external(&s.external),
            action: action.index() as u64,
            internal_next: sym.internal(next),
        }
    }
}

/// Discretized transitions `(i_t, b_t, e_t, a_t, i_{t+1})` with their counts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TransitionDataset {
    pub transitions: Vec<TransitionSymbols>,
    pub counts: HashMap<TransitionSymbols, u64>,
}

impl TransitionDataset {
    pub fn push(&mut self, t: TransitionSymbols) {
        self.push_weighted(t, 1);
    }

    /// Counts `t` with multiplicity `weight` but lists it once; used for exactly
    /// enumerated distributions.
    pub fn push_weighted(&mut self, t: TransitionSymbols, weight: u64) {
        if weight > 0 {
            self.transitions.push(t);
        }
        *self.counts.entry(t).or_insert(0) += weight;
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Distinct symbols seen for each component, in tuple order.
    pub fn alphabet_sizes(&self) -> [usize; 5] {
        use std::collections::HashSet;
        let mut sets: [HashSet<u64>; 5] = Default::default();
        for t in self.counts.keys() {
            for (set, v) in sets
                .iter_mut()
                .zip([t.internal, t.boundary, t.external, t.action, t.internal_next])
            {
                set.insert(v);
            }
        }
        sets.map(|s| s.len())
    }
}

pub fn random_policy(_: &FactoredState, rng: &mut SimRng) -> Action {
    Action::ALL[rng.random_range(0..Action::COUNT)]
}

/// Rolls `env` forward for `steps` transitions under `policy`, restarting from
/// `reset` whenever the agent dies.
pub fn collect_transitions<P>(
    env: &HomeoGridEnv,
    mut policy: P,
    steps: usize,
    seed: u64,
    symbolizer: &Symbolizer,
) -> Result<TransitionDataset>
where
    P: FnMut(&FactoredState, &mut SimRng) -> Action,
{
    if steps == 0 {
        return Err(Error::config("collect_transitions needs steps >= 1"));
    }
    let grace = env.drive().grace_steps;
    let mut rng = rng::stream(seed, 0, rng::purpose::BLANKET);
    let mut ds = TransitionDataset::default();
    let mut s = env.reset(seed);
    let mut tracker = ViabilityTracker::default();
    for step in 0..steps {
        let action = policy(&s, &mut rng);
        let next = step_factored(env, &s, action, &mut rng).map_err(|e| e.at_step(step as u64))?;
        ds.push(TransitionSymbols::of(symbolizer, &s, action, &next.internal));
        let viable = env.drive().in_viability(&next.internal)?;
        if tracker.push(viable, grace) == Status::Dead {
            s = env.reset(seed);
            tracker = ViabilityTracker::default();
        } else {
            s = next;
        }
    }
    Ok(ds)
}
