use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{FactoredState, Tag};

/// Packed tabular observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObsKey(pub u64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizerSpec {
    /// Bin edges per internal dimension. An empty list collapses that dimension to one bin.
    pub internal_edges: Vec<Vec<f64>>,
    #[serde(default = "yes")]
    pub use_internal: bool,
    #[serde(default = "yes")]
    pub use_position: bool,
    #[serde(default = "yes")]
    pub use_tag: bool,
    /// Whether food or water is being ingested at the boundary right now.
    #[serde(default)]
    pub use_ingestion: bool,
    #[serde(default)]
    pub season_visible: bool,
}

fn yes() -> bool {
    true
}

/// Maps factored states to small integer keys. Bins are half-open,
/// `[edge_i, edge_{i+1})`, so a value equal to an edge lands in the upper bin.
#[derive(Clone, Debug, PartialEq)]
pub struct Discretizer {
    spec: DiscretizerSpec,
}

impl Discretizer {
    pub fn new(spec: DiscretizerSpec) -> Result<Self> {
        for (dim, edges) in spec.internal_edges.iter().enumerate() {
            if edges.iter().any(|e| !e.is_finite()) {
                return Err(Error::config(format!("dim {dim}: non-finite bin edge")));
            }
            if edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config(format!("dim {dim}: bin edges must be strictly increasing")));
            }
        }
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &DiscretizerSpec {
        &self.spec
    }

    pub fn dims(&self) -> usize {
        self.spec.internal_edges.len()
    }

    pub fn bins(&self, dim: usize) -> usize {
        self.spec.internal_edges[dim].len() + 1
    }

    pub fn bin(&self, dim: usize, x: f64) -> usize {
        self.spec.internal_edges[dim].partition_point(|&e| e <= x)
    }

    /// Packed bins of the internal state alone.
    pub fn internal_symbol(&self, values: &[f64]) -> u64 {
        let mut key = 0u64;
        for (dim, &x) in values.iter().enumerate().take(self.dims()) {
            key = key * self.bins(dim) as u64 + self.bin(dim, x) as u64;
        }
        key
    }

    pub fn internal_alphabet(&self) -> u64 {
        (0..self.dims()).map(|d| self.bins(d) as u64).product()
    }

    pub fn key(&self, s: &FactoredState) -> ObsKey {
        let e = &s.external;
        let mut key = 0u64;
        let mut push = |value: u64, radix: u64| key = key * radix + value;
        if self.spec.use_internal {
            push(self.internal_symbol(&s.internal.values), self.internal_alphabet());
        }
        if self.spec.use_position {
            push(e.agent_pos.row as u64, e.rows as u64);
            push(e.agent_pos.col as u64, e.cols as u64);
        }
        if self.spec.use_tag {
            push(e.tag_under_agent().index() as u64, Tag::ALL.len() as u64);
        }
        if self.spec.use_ingestion {
            let flux = &s.boundary.ingestion;
            push(u64::from(flux.food > 0.0) * 2 + u64::from(flux.water > 0.0), 4);
        }
        if self.spec.season_visible {
            // most significant, so no fixed radix is needed
            key += (e.season as u64 + 1) << 48;
        }
        ObsKey(key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{homeogrid_s_drive, EnvSpec, HomeoGridEnv};
    use crate::mdp::Pos;

    fn disc() -> Discretizer {
        Discretizer::new(DiscretizerSpec {
            internal_edges: vec![vec![0.3, 0.5, 0.7], vec![0.3, 0.5, 0.7], vec![36.0, 38.0]],
            use_internal: true,
            use_position: true,
            use_tag: true,
            use_ingestion: false,
            season_visible: false,
        })
        .unwrap()
    }

    #[test]
    fn half_open_bins() {
        let d = disc();
        assert_eq!(d.bin(0, 0.0), 0);
        assert_eq!(d.bin(0, 0.3), 1);
        assert_eq!(d.bin(0, 0.2999), 0);
        assert_eq!(d.bin(0, 0.7), 3);
        assert_eq!(d.bin(0, 9.0), 3);
        assert_eq!(d.bin(2, 37.0), 1);
    }

    #[test]
    fn keys_are_deterministic_and_coarse() {
        let env = HomeoGridEnv::new(EnvSpec::homeogrid_s(), homeogrid_s_drive()).unwrap();
        let d = disc();
        let s = env.reset(1);
        assert_eq!(d.key(&s), d.key(&s.clone()));

        let mut nearby = s.clone();
        nearby.internal.values[0] += 0.05;
        nearby.internal.values[2] -= 0.5;
        assert_eq!(d.key(&s), d.key(&nearby));

        let mut moved = s.clone();
        moved.external.agent_pos = Pos::new(3, 4);
        assert_ne!(d.key(&s), d.key(&moved));

        let mut edge = s.clone();
        edge.internal.values[0] = 0.7;
        let mut below = s.clone();
        below.internal.values[0] = 0.7 - 1e-12;
        assert_ne!(d.key(&edge), d.key(&below));
    }

    #[test]
    fn season_visibility() {
        let env = HomeoGridEnv::new(EnvSpec::homeogrid_s(), homeogrid_s_drive()).unwrap();
        let mut spec = disc().spec().clone();
        let s = env.reset(1);
        let mut later = s.clone();
        later.external.season = 1;
        assert_eq!(disc().key(&s), disc().key(&later));
        spec.season_visible = true;
        let d = Discretizer::new(spec).unwrap();
        assert_ne!(d.key(&s), d.key(&later));
    }

    #[test]
    fn rejects_unsorted_edges() {
        let spec = DiscretizerSpec {
            internal_edges: vec![vec![0.5, 0.5]],
            use_internal: true,
            use_position: true,
            use_tag: true,
            use_ingestion: false,
            season_visible: false,
        };
        assert!(Discretizer::new(spec).is_err());
    }
}
