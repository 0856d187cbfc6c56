//! HomeoGrid: a seasonal survival gridworld whose dynamics respect the blanket,
//! plus a coupled control variant that leaks ambient temperature straight into
//! the core temperature.
//!
//! Internal dimensions are fixed: `0` energy, `1` hydration, `2` core temperature.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homeostat::{DriveModel, Interval};
use crate::mdp::{
    Action, BoundaryState, ExternalState, FactoredState, Flux, InternalState, Pos, Schema, Tag,
    TransitionModel,
};
use crate::rng::{self, SimRng};

pub const ENERGY: usize = 0;
pub const HYDRATION: usize = 1;
pub const CORE_TEMP: usize = 2;
pub const INTERNAL_DIMS: usize = 3;
pub const INTERNAL_NAMES: [&str; INTERNAL_DIMS] = ["energy", "hydration", "core_temp"];

/// Sensor noise is clipped at this many standard deviations.
const NOISE_CLIP_SIGMAS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub row: usize,
    pub col: usize,
    pub tag: Tag,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeasonSpec {
    pub resources: Vec<Placement>,
    pub ambient_baseline: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub start: Pos,
    pub seasons: Vec<SeasonSpec>,
    /// Ambient change per column, centred on the middle column.
    #[serde(default)]
    pub ambient_gradient: f64,
    /// Shade cells are this much cooler than their surroundings.
    #[serde(default)]
    pub shade_offset: f64,
    #[serde(default)]
    pub noise_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeasonSchedule {
    pub period: u64,
    pub order: Vec<usize>,
}

impl SeasonSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::config("season period must be >= 1"));
        }
        if self.order.is_empty() {
            return Err(Error::config("season order must be non-empty"));
        }
        Ok(())
    }
}

/// Season index active at step `t`.
pub fn advance_season(schedule: &SeasonSchedule, t: u64) -> usize {
    let slot = (t / schedule.period) % schedule.order.len() as u64;
    schedule.order[slot as usize]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dynamics {
    /// Energy decay per step.
    pub c_e: f64,
    /// Hydration decay per step.
    pub c_h: f64,
    pub e_gain: f64,
    pub w_gain: f64,
    /// Skin conductance: fraction of the sensed gap closed per step.
    pub kappa: f64,
    /// Direct ambient-to-core leak; zero for the factored world.
    #[serde(default)]
    pub leak: f64,
}

/// Serializable description of a HomeoGrid world.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSpec {
    pub grid: GridSpec,
    pub schedule: SeasonSchedule,
    pub dynamics: Dynamics,
}

impl EnvSpec {
    /// Desk-scale default world: 7x7, a temperate and a hot season of 500 steps each,
    /// with food and water swapping corners between them.
    pub fn homeogrid_s() -> Self {
        let p = |row, col, tag| Placement { row, col, tag };
        EnvSpec {
            grid: GridSpec {
                rows: 7,
                cols: 7,
                start: Pos::new(3, 3),
                seasons: vec![
                    SeasonSpec {
                        resources: vec![
                            p(1, 1, Tag::Food),
                            p(5, 5, Tag::Water),
                            p(1, 5, Tag::Shade),
                            p(5, 1, Tag::Shade),
                        ],
                        ambient_baseline: 37.0,
                    },
                    SeasonSpec {
                        resources: vec![
                            p(5, 1, Tag::Food),
                            p(1, 5, Tag::Water),
                            p(1, 1, Tag::Shade),
                            p(5, 5, Tag::Shade),
                        ],
                        ambient_baseline: 39.0,
                    },
                ],
                ambient_gradient: 0.3,
                shade_offset: 2.0,
                noise_std: 0.0,
            },
            schedule: SeasonSchedule {
                period: 500,
                order: vec![0, 1],
            },
            dynamics: Dynamics {
                c_e: 0.005,
                c_h: 0.006,
                e_gain: 0.08,
                w_gain: 0.08,
                kappa: 0.1,
                leak: 0.0,
            },
        }
    }
}

/// Drive model matched to [`EnvSpec::homeogrid_s`].
pub fn homeogrid_s_drive() -> DriveModel {
    DriveModel {
        set_point: vec![0.8, 0.8, 37.0],
        weights: vec![6.0, 6.0, 0.5],
        n: 2.0,
        m: 2.0,
        viability: vec![
            Interval { lo: 0.2, hi: 1.4 },
            Interval { lo: 0.2, hi: 1.4 },
            Interval { lo: 34.5, hi: 39.5 },
        ],
        grace_steps: 25,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Factored,
    CoupledControl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Alive,
    Dead,
}

/// A validated HomeoGrid world with per-season layouts precomputed.
#[derive(Clone, Debug)]
pub struct HomeoGridEnv {
    spec: EnvSpec,
    drive: DriveModel,
    layouts: Vec<Vec<Tag>>,
    fields: Vec<Vec<f64>>,
    noise: Option<Normal<f64>>,
}

impl HomeoGridEnv {
    pub fn new(spec: EnvSpec, drive: DriveModel) -> Result<Self> {
        validate_spec(&spec)?;
        drive.validate()?;
        if drive.k() != INTERNAL_DIMS {
            return Err(Error::config(format!(
                "HomeoGrid has {INTERNAL_DIMS} internal dims, drive model has {}",
                drive.k()
            )));
        }
        let grid = &spec.grid;
        let mut layouts = Vec::with_capacity(grid.seasons.len());
        let mut fields = Vec::with_capacity(grid.seasons.len());
        for season in &grid.seasons {
            let mut layout = vec![Tag::Empty; grid.rows * grid.cols];
            for p in &season.resources {
                layout[p.row * grid.cols + p.col] = p.tag;
            }
            let centre = (grid.cols as f64 - 1.0) / 2.0;
            let field = layout
                .iter()
                .enumerate()
                .map(|(idx, tag)| {
                    let col = (idx % grid.cols) as f64;
                    let shade = if *tag == Tag::Shade { grid.shade_offset } else { 0.0 };
                    season.ambient_baseline + grid.ambient_gradient * (col - centre) - shade
                })
                .collect();
            layouts.push(layout);
            fields.push(field);
        }
        let noise = if grid.noise_std > 0.0 {
            Some(Normal::new(0.0, grid.noise_std).map_err(|e| Error::config(e.to_string()))?)
        } else {
            None
        };
        Ok(Self {
            spec,
            drive,
            layouts,
            fields,
            noise,
        })
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn drive(&self) -> &DriveModel {
        &self.drive
    }

    pub fn variant(&self) -> Variant {
        if self.spec.dynamics.leak > 0.0 {
            Variant::CoupledControl
        } else {
            Variant::Factored
        }
    }

    pub fn layout(&self, season: usize) -> &[Tag] {
        &self.layouts[season]
    }

    pub fn ambient_field(&self, season: usize) -> &[f64] {
        &self.fields[season]
    }

    pub fn season_count(&self) -> usize {
        self.layouts.len()
    }

    /// Same world with a different sensor noise level.
    pub fn with_noise_std(&self, std: f64) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.grid.noise_std = std;
        Self::new(spec, self.drive.clone())
    }

    /// Control world whose core temperature also reads the raw ambient
    /// temperature under the agent, bypassing the boundary, with coefficient `leak`.
    pub fn make_coupled_variant(&self, leak: f64) -> Result<Self> {
        if !(leak > 0.0 && leak.is_finite()) {
            return Err(Error::config(format!("coupling leak must be > 0, got {leak}")));
        }
        let mut spec = self.spec.clone();
        spec.dynamics.leak = leak;
        Self::new(spec, self.drive.clone())
    }

    pub fn transition_maps(&self) -> &Self {
        self
    }

    /// Initial state: internal at the set point, agent at the start cell, first season.
    pub fn reset(&self, seed: u64) -> FactoredState {
        self.reset_with_internal(seed, InternalState::new(self.drive.set_point.clone()))
    }

    pub fn reset_with_internal(&self, seed: u64, internal: InternalState) -> FactoredState {
        let mut rng = rng::stream(seed, 0, rng::purpose::ENV);
        let season = advance_season(&self.spec.schedule, 0);
        let external = ExternalState {
            rows: self.spec.grid.rows,
            cols: self.spec.grid.cols,
            agent_pos: self.spec.grid.start,
            resources: self.layouts[season].clone(),
            ambient: self.fields[season].clone(),
            sensor_noise: self.draw_noise(&mut rng),
            season,
        };
        let boundary = BoundaryState {
            sensed_ambient: external.ambient_under_agent() + external.sensor_noise,
            ingestion: Flux::default(),
        };
        FactoredState {
            internal,
            boundary,
            external,
            t: 0,
        }
    }

    /// Fresh body at the start cell while the world clock keeps running at `t`.
    pub fn respawn(&self, seed: u64, t: u64) -> FactoredState {
        let mut s = self.reset(seed);
        let season = advance_season(&self.spec.schedule, t);
        s.external.season = season;
        s.external.resources = self.layouts[season].clone();
        s.external.ambient = self.fields[season].clone();
        s.boundary.sensed_ambient = s.external.ambient_under_agent() + s.external.sensor_noise;
        s.t = t;
        s
    }

    fn draw_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.noise {
            Some(normal) => {
                let bound = NOISE_CLIP_SIGMAS * self.spec.grid.noise_std;
                normal.sample(rng).clamp(-bound, bound)
            }
            None => 0.0,
        }
    }

    pub fn moved(&self, pos: Pos, action: Action) -> Pos {
        let grid = &self.spec.grid;
        match action {
            Action::MoveN if pos.row > 0 => Pos::new(pos.row - 1, pos.col),
            Action::MoveS if pos.row + 1 < grid.rows => Pos::new(pos.row + 1, pos.col),
            Action::MoveE if pos.col + 1 < grid.cols => Pos::new(pos.row, pos.col + 1),
            Action::MoveW if pos.col > 0 => Pos::new(pos.row, pos.col - 1),
            _ => pos,
        }
    }

    pub fn is_dead(&self, history: &[bool]) -> bool {
        terminal_check(self.drive.grace_steps, history) == Status::Dead
    }
}

fn validate_spec(spec: &EnvSpec) -> Result<()> {
    let grid = &spec.grid;
    if grid.rows == 0 || grid.cols == 0 {
        return Err(Error::config("grid must have positive rows and cols"));
    }
    if grid.start.row >= grid.rows || grid.start.col >= grid.cols {
        return Err(Error::config(format!("start cell {:?} out of bounds", grid.start)));
    }
    if grid.seasons.is_empty() {
        return Err(Error::config("at least one season is required"));
    }
    if !(grid.noise_std >= 0.0 && grid.noise_std.is_finite()) {
        return Err(Error::config("noise_std must be finite and >= 0"));
    }
    if !grid.ambient_gradient.is_finite() || !grid.shade_offset.is_finite() {
        return Err(Error::config("ambient gradient and shade offset must be finite"));
    }
    for (s, season) in grid.seasons.iter().enumerate() {
        if !season.ambient_baseline.is_finite() {
            return Err(Error::config(format!("season {s}: non-finite ambient baseline")));
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &season.resources {
            if p.row >= grid.rows || p.col >= grid.cols {
                return Err(Error::config(format!(
                    "season {s}: placement ({}, {}) out of bounds",
                    p.row, p.col
                )));
            }
            if !seen.insert((p.row, p.col)) {
                return Err(Error::config(format!(
                    "season {s}: cell ({}, {}) placed twice",
                    p.row, p.col
                )));
            }
        }
        for needed in [Tag::Food, Tag::Water] {
            if !season.resources.iter().any(|p| p.tag == needed) {
                return Err(Error::config(format!("season {s}: no {needed:?} cell")));
            }
        }
    }
    spec.schedule.validate()?;
    if let Some(bad) = spec.schedule.order.iter().find(|&&i| i >= grid.seasons.len()) {
        return Err(Error::config(format!("season order references unknown season {bad}")));
    }
    let d = &spec.dynamics;
    if !(d.c_e >= 0.0 && d.c_h >= 0.0) {
        return Err(Error::config("decay rates must be >= 0"));
    }
    if !(d.e_gain > 0.0 && d.w_gain > 0.0) {
        return Err(Error::config("ingestion gains must be > 0"));
    }
    if !(d.kappa > 0.0 && d.kappa <= 1.0) {
        return Err(Error::config(format!("kappa must lie in (0, 1], got {}", d.kappa)));
    }
    if !(d.leak >= 0.0 && d.leak.is_finite()) {
        return Err(Error::config("leak must be >= 0"));
    }
    Ok(())
}

/// `Dead` iff the trailing run of `false` flags is longer than `grace_steps`.
pub fn terminal_check(grace_steps: u32, history: &[bool]) -> Status {
    let streak = history.iter().rev().take_while(|ok| !**ok).count();
    if streak > grace_steps as usize {
        Status::Dead
    } else {
        Status::Alive
    }
}

/// Incremental form of [`terminal_check`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ViabilityTracker {
    streak: u32,
}

impl ViabilityTracker {
    pub fn push(&mut self, viable: bool, grace_steps: u32) -> Status {
        if viable {
            self.streak = 0;
        } else {
            self.streak += 1;
        }
        if self.streak > grace_steps {
            Status::Dead
        } else {
            Status::Alive
        }
    }
}

impl TransitionModel for HomeoGridEnv {
    fn schema(&self) -> Schema {
        Schema {
            k: INTERNAL_DIMS,
            rows: self.spec.grid.rows,
            cols: self.spec.grid.cols,
        }
    }

    fn boundary(
        &self,
        _internal: &InternalState,
        external: &ExternalState,
        action: Action,
    ) -> BoundaryState {
        let d = &self.spec.dynamics;
        let tag = external.tag_under_agent();
        let consume = action == Action::Consume;
        BoundaryState {
            sensed_ambient: external.ambient_under_agent() + external.sensor_noise,
            ingestion: Flux {
                food: if consume && tag == Tag::Food { d.e_gain } else { 0.0 },
                water: if consume && tag == Tag::Water { d.w_gain } else { 0.0 },
            },
        }
    }

    fn internal(
        &self,
        internal: &InternalState,
        boundary: &BoundaryState,
        _action: Action,
    ) -> InternalState {
        let d = &self.spec.dynamics;
        let v = &internal.values;
        let core = v[CORE_TEMP];
        InternalState::new(vec![
            v[ENERGY] - d.c_e + boundary.ingestion.food,
            v[HYDRATION] - d.c_h + boundary.ingestion.water,
            core + d.kappa * (boundary.sensed_ambient - core),
        ])
    }

    fn external<R: Rng + ?Sized>(
        &self,
        external: &ExternalState,
        _boundary: &BoundaryState,
        action: Action,
        t_next: u64,
        rng: &mut R,
    ) -> ExternalState {
        let season = advance_season(&self.spec.schedule, t_next);
        ExternalState {
            rows: external.rows,
            cols: external.cols,
            agent_pos: self.moved(external.agent_pos, action),
            resources: self.layouts[season].clone(),
            ambient: self.fields[season].clone(),
            sensor_noise: self.draw_noise(rng),
            season,
        }
    }

    fn leak(
        &self,
        internal: &InternalState,
        external: &ExternalState,
        _action: Action,
    ) -> Option<Vec<f64>> {
        let leak = self.spec.dynamics.leak;
        if leak > 0.0 {
            let core = internal.values[CORE_TEMP];
            Some(vec![0.0, 0.0, leak * (external.ambient_under_agent() - core)])
        } else {
            None
        }
    }
}

/// Runs an environment forward under a fixed action sequence; used by tests
/// and probes that need whole trajectories without an agent.
pub fn rollout(
    env: &HomeoGridEnv,
    start: &FactoredState,
    actions: impl IntoIterator<Item = Action>,
    rng: &mut SimRng,
) -> Result<Vec<FactoredState>> {
    let mut states = vec![start.clone()];
    for a in actions {
        let next = crate::mdp::step_factored(env, states.last().unwrap(), a, rng)?;
        states.push(next);
    }
    Ok(states)
}
