//! Factored state space and the blanket-respecting step.
//!
//! A state is split into internal, boundary and external parts. The update maps
//! of a [`TransitionModel`] only see the parts they are allowed to see: the
//! internal map never receives the external state and the external map never
//! receives the internal state. One step runs, all from time-`t` values,
//!
//! ```text
//! b' = f_B(i, e, a)
//! i' = f_I(i, b, a)
//! e' = f_E(e, b, a, rng)
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physiological variables of the agent (energy, hydration, core temperature, ...).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InternalState {
    pub values: Vec<f64>,
}

impl InternalState {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Equality on the IEEE bit patterns, not on numeric value.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Resources crossing the boundary during one step (units/step).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Flux {
    pub food: f64,
    pub water: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryState {
    /// Skin-sensed ambient temperature (degrees).
    pub sensed_ambient: f64,
    pub ingestion: Flux,
}

impl BoundaryState {
    pub fn is_valid(&self) -> bool {
        self.sensed_ambient.is_finite()
            && self.ingestion.food.is_finite()
            && self.ingestion.water.is_finite()
            && self.ingestion.food >= 0.0
            && self.ingestion.water >= 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    Empty,
    Food,
    Water,
    Shade,
}

impl Tag {
    pub const ALL: [Tag; 4] = [Tag::Empty, Tag::Food, Tag::Water, Tag::Shade];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_resource(self) -> bool {
        matches!(self, Tag::Food | Tag::Water)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub row: usize,
    pub col: usize,
}

impl Pos {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// The world outside the agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalState {
    pub rows: usize,
    pub cols: usize,
    pub agent_pos: Pos,
    /// Row-major, `rows * cols` entries.
    pub resources: Vec<Tag>,
    /// Row-major ambient temperature per cell (degrees).
    pub ambient: Vec<f64>,
    /// Current realisation of the thermal sensor's noise.
    pub sensor_noise: f64,
    pub season: usize,
}

impl ExternalState {
    pub fn cell_index(&self, pos: Pos) -> usize {
        pos.row * self.cols + pos.col
    }

    pub fn tag_at(&self, pos: Pos) -> Tag {
        self.resources[self.cell_index(pos)]
    }

    pub fn tag_under_agent(&self) -> Tag {
        self.tag_at(self.agent_pos)
    }

    pub fn ambient_under_agent(&self) -> f64 {
        self.ambient[self.cell_index(self.agent_pos)]
    }

    fn check(&self, schema: &Schema) -> Result<()> {
        if self.rows != schema.rows || self.cols != schema.cols {
            return Err(Error::SchemaMismatch(format!(
                "grid is {}x{}, model expects {}x{}",
                self.rows, self.cols, schema.rows, schema.cols
            )));
        }
        let cells = self.rows * self.cols;
        if self.resources.len() != cells || self.ambient.len() != cells {
            return Err(Error::SchemaMismatch(format!(
                "per-cell fields have {} / {} entries, grid has {cells}",
                self.resources.len(),
                self.ambient.len()
            )));
        }
        if self.agent_pos.row >= self.rows || self.agent_pos.col >= self.cols {
            return Err(Error::SchemaMismatch(format!(
                "agent position {:?} outside {}x{} grid",
                self.agent_pos, self.rows, self.cols
            )));
        }
        if !self.sensor_noise.is_finite() || self.ambient.iter().any(|v| !v.is_finite()) {
            return Err(Error::SchemaMismatch("non-finite ambient field".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactoredState {
    pub internal: InternalState,
    pub boundary: BoundaryState,
    pub external: ExternalState,
    pub t: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    MoveN,
    MoveS,
    MoveE,
    MoveW,
    Consume,
    Rest,
}

impl Action {
    pub const ALL: [Action; 6] = [
        Action::MoveN,
        Action::MoveS,
        Action::MoveE,
        Action::MoveW,
        Action::Consume,
        Action::Rest,
    ];
    pub const COUNT: usize = Self::ALL.len();

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::MoveN => "N",
            Action::MoveS => "S",
            Action::MoveE => "E",
            Action::MoveW => "W",
            Action::Consume => "consume",
            Action::Rest => "rest",
        }
    }
}

/// Shape every state handled by a model must have.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Schema {
    pub k: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Schema {
    pub fn check(&self, state: &FactoredState) -> Result<()> {
        if state.internal.dim() != self.k {
            return Err(Error::SchemaMismatch(format!(
                "internal state has {} dims, model expects {}",
                state.internal.dim(),
                self.k
            )));
        }
        if !state.internal.is_finite() {
            return Err(Error::SchemaMismatch("non-finite internal state".into()));
        }
        if !state.boundary.is_valid() {
            return Err(Error::SchemaMismatch(format!(
                "invalid boundary state {:?}",
                state.boundary
            )));
        }
        state.external.check(self)
    }
}

/// The three update maps. Their argument lists are the blanket: `internal`
/// has no access to the external state and `external` none to the internal one.
pub trait TransitionModel {
    fn schema(&self) -> Schema;

    fn boundary(&self, internal: &InternalState, external: &ExternalState, action: Action)
        -> BoundaryState;

    fn internal(&self, internal: &InternalState, boundary: &BoundaryState, action: Action)
        -> InternalState;

    fn external<R: Rng + ?Sized>(
        &self,
        external: &ExternalState,
        boundary: &BoundaryState,
        action: Action,
        t_next: u64,
        rng: &mut R,
    ) -> ExternalState;

    /// Additive internal increment that reads the external state directly,
    /// bypassing the boundary. `None` for every model that respects the blanket;
    /// only deliberately coupled control models return a value.
    fn leak(
        &self,
        _internal: &InternalState,
        _external: &ExternalState,
        _action: Action,
    ) -> Option<Vec<f64>> {
        None
    }
}

/// Advances `state` by one step. The input is left untouched.
pub fn step_factored<M, R>(
    model: &M,
    state: &FactoredState,
    action: Action,
    rng: &mut R,
) -> Result<FactoredState>
where
    M: TransitionModel + ?Sized,
    R: Rng + ?Sized,
{
    model.schema().check(state)?;
    let FactoredState {
        internal,
        boundary,
        external,
        t,
    } = state;

    let boundary_next = model.boundary(internal, external, action);
    let mut internal_next = model.internal(internal, boundary, action);
    if let Some(delta) = model.leak(internal, external, action) {
        if delta.len() != internal_next.dim() {
            return Err(Error::SchemaMismatch(format!(
                "leak has {} dims, internal state {}",
                delta.len(),
                internal_next.dim()
            )));
        }
        for (v, d) in internal_next.values.iter_mut().zip(delta) {
            *v += d;
        }
    }
    let external_next = model.external(external, boundary, action, t + 1, rng);

    Ok(FactoredState {
        internal: internal_next,
        boundary: boundary_next,
        external: external_next,
        t: t + 1,
    })
}

/// Copy of `state` with its external part swapped for `replacement`.
pub fn perturb_external(state: &FactoredState, replacement: ExternalState) -> Result<FactoredState> {
    let schema = Schema {
        k: state.internal.dim(),
        rows: state.external.rows,
        cols: state.external.cols,
    };
    replacement.check(&schema)?;
    Ok(FactoredState {
        internal: state.internal.clone(),
        boundary: state.boundary,
        external: replacement,
        t: state.t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    struct Identity;

    impl TransitionModel for Identity {
        fn schema(&self) -> Schema {
            Schema { k: 2, rows: 2, cols: 2 }
        }
        fn boundary(&self, _: &InternalState, _: &ExternalState, _: Action) -> BoundaryState {
            BoundaryState::default()
        }
        fn internal(&self, i: &InternalState, _: &BoundaryState, _: Action) -> InternalState {
            i.clone()
        }
        fn external<R: Rng + ?Sized>(
            &self,
            e: &ExternalState,
            _: &BoundaryState,
            _: Action,
            _: u64,
            _: &mut R,
        ) -> ExternalState {
            e.clone()
        }
    }

    fn state() -> FactoredState {
        FactoredState {
            internal: InternalState::new(vec![0.5, 37.0]),
            boundary: BoundaryState::default(),
            external: ExternalState {
                rows: 2,
                cols: 2,
                agent_pos: Pos::new(1, 0),
                resources: vec![Tag::Food, Tag::Empty, Tag::Water, Tag::Shade],
                ambient: vec![30.0; 4],
                sensor_noise: 0.0,
                season: 0,
            },
            t: 4,
        }
    }

    #[test]
    fn identity_model_only_advances_time() {
        let s = state();
        let next = step_factored(&Identity, &s, Action::Rest, &mut stream(1, 0, "t")).unwrap();
        assert_eq!(next.t, 5);
        assert_eq!(FactoredState { t: 4, ..next }, s);
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let mut s = state();
        s.internal.values.push(1.0);
        let err = step_factored(&Identity, &s, Action::Rest, &mut stream(1, 0, "t")).unwrap_err();
        assert!(matches!(err, Error::SchemaMismatch(_)));

        let mut s = state();
        s.external.agent_pos = Pos::new(2, 0);
        assert!(step_factored(&Identity, &s, Action::Rest, &mut stream(1, 0, "t")).is_err());

        let mut s = state();
        s.boundary.ingestion.food = -1.0;
        assert!(step_factored(&Identity, &s, Action::Rest, &mut stream(1, 0, "t")).is_err());
    }

    #[test]
    fn perturb_with_own_external_is_identity() {
        let s = state();
        let out = perturb_external(&s, s.external.clone()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn perturb_keeps_internal_and_boundary() {
        let s = state();
        let mut e = s.external.clone();
        e.agent_pos = Pos::new(0, 1);
        e.ambient = vec![45.0; 4];
        let out = perturb_external(&s, e.clone()).unwrap();
        assert_eq!(out.internal, s.internal);
        assert_eq!(out.boundary, s.boundary);
        assert_eq!(out.external, e);

        e.resources.pop();
        assert!(matches!(perturb_external(&s, e), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn action_indices_round_trip() {
        assert_eq!(Action::COUNT, 6);
        for (i, a) in Action::ALL.iter().enumerate() {
            assert_eq!(a.index(), i);
            assert_eq!(Action::from_index(i), Some(*a));
        }
        assert_eq!(Action::from_index(6), None);
    }
}
