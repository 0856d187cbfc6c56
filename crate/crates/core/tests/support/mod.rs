#![allow(dead_code)]

use std::collections::HashMap;

use iai_core::agents::{softmax_probs, ObsKey, QTable, Transition};
use iai_core::blanket::TransitionDataset;
use iai_core::homeostat::{DriveModel, Interval};
use iai_core::mdp::InternalState;
use rand::Rng;

/// Five cells in a row; the body's set point is the middle cell.
pub const CHAIN_STATES: usize = 5;
pub const CHAIN_ACTIONS: usize = 3;
pub const CHAIN_SET_POINT: usize = 2;

pub fn chain_drive() -> DriveModel {
    DriveModel {
        set_point: vec![CHAIN_SET_POINT as f64],
        weights: vec![1.0],
        n: 2.0,
        m: 2.0,
        viability: vec![Interval { lo: 0.0, hi: (CHAIN_STATES - 1) as f64 }],
        grace_steps: 0,
    }
}

/// Left, stay, right with blocking ends.
pub fn chain_next(s: usize, a: usize) -> usize {
    match a {
        0 => s.saturating_sub(1),
        2 => (s + 1).min(CHAIN_STATES - 1),
        _ => s,
    }
}

pub fn chain_reward(dm: &DriveModel, s: usize, s2: usize) -> f64 {
    dm.homeostatic_reward(
        &InternalState::new(vec![s as f64]),
        &InternalState::new(vec![s2 as f64]),
    )
    .unwrap()
}

/// Optimal action values by value iteration to a fixed point.
pub fn value_iteration(dm: &DriveModel, gamma: f64) -> Vec<[f64; CHAIN_ACTIONS]> {
    let mut q = vec![[0.0; CHAIN_ACTIONS]; CHAIN_STATES];
    loop {
        let mut next = q.clone();
        let mut delta: f64 = 0.0;
        for s in 0..CHAIN_STATES {
            for a in 0..CHAIN_ACTIONS {
                let s2 = chain_next(s, a);
                let best = q[s2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                next[s][a] = chain_reward(dm, s, s2) + gamma * best;
                delta = delta.max((next[s][a] - q[s][a]).abs());
            }
        }
        q = next;
        if delta < 1e-15 {
            return q;
        }
    }
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Softmax Q-learning on the chain with a geometrically annealed temperature.
pub fn train_chain<R: Rng>(
    dm: &DriveModel,
    alpha: f64,
    gamma: f64,
    steps: usize,
    tau: (f64, f64),
    rng: &mut R,
) -> QTable {
    let mut q = QTable::new(CHAIN_ACTIONS);
    let decay = (tau.1 / tau.0).powf(1.0 / steps as f64);
    let mut temp = tau.0;
    let mut s = 0;
    for _ in 0..steps {
        let obs = ObsKey(s as u64);
        let probs = softmax_probs(&q.values(obs), temp);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut a = CHAIN_ACTIONS - 1;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                a = i;
                break;
            }
        }
        let s2 = chain_next(s, a);
        let tr = Transition {
            obs,
            action: a,
            reward: chain_reward(dm, s, s2),
            next_obs: ObsKey(s2 as u64),
            terminal: false,
        };
        q.update(&tr, alpha, gamma, 1.0).unwrap();
        s = s2;
        temp *= decay;
    }
    q
}

/// `I(X; Y | Z)` straight from the joint probability table, with
/// `X = I_{t+1}`, `Y = E_t`, `Z = (I_t, B_t, A_t)`.
pub fn brute_force_cmi(ds: &TransitionDataset) -> f64 {
    let n = ds.total() as f64;
    let mut pz: HashMap<(u64, u64, u64), f64> = HashMap::new();
    let mut pxz: HashMap<(u64, u64, u64, u64), f64> = HashMap::new();
    let mut pyz: HashMap<(u64, u64, u64, u64), f64> = HashMap::new();
    let mut pxyz: HashMap<(u64, u64, u64, u64, u64), f64> = HashMap::new();
    for (t, &c) in &ds.counts {
        let p = c as f64 / n;
        let z = (t.internal, t.boundary, t.action);
        *pz.entry(z).or_default() += p;
        *pxz.entry((t.internal_next, z.0, z.1, z.2)).or_default() += p;
        *pyz.entry((t.external, z.0, z.1, z.2)).or_default() += p;
        *pxyz.entry((t.internal_next, t.external, z.0, z.1, z.2)).or_default() += p;
    }
    let mut total = 0.0;
    for (&(x, y, i, b, a), &p) in &pxyz {
        let z = (i, b, a);
        total += p * (p * pz[&z] / (pxz[&(x, i, b, a)] * pyz[&(y, i, b, a)])).ln();
    }
    total
}
