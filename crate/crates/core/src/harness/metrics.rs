//! Per-seed metrics derived from evaluation logs.
//!
//! * `viability_fraction`: steps inside the viability zone over the configured
//!   evaluation length (steps after death count as outside).
//! * `recovery_time`: after a season switch, steps until the 50-step trailing
//!   mean of drive, taken over post-switch steps only, is back within 10% of the
//!   mean over the 50 steps before the switch. Censored at the end of the log.
//! * `retention`: viability fraction on the second visit of the first season
//!   divided by the fraction on its first visit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::run::EpisodeLog;
use crate::envs::{advance_season, SeasonSchedule};
use crate::mdp::{Pos, Tag};

pub const RECOVERY_WINDOW: usize = 50;
pub const RECOVERY_TOLERANCE: f64 = 0.10;
pub const SATIATED_DRIVE: f64 = 0.1;
pub const DEFICIT_DRIVE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub survival_steps: u64,
    pub viability_fraction: f64,
    pub mean_drive: f64,
    pub entropy_satiated: f64,
    pub entropy_deficit: f64,
    /// Recovery after the first return to the first season (the B to A switch).
    pub recovery_time: f64,
    pub retention: f64,
    pub visits_food: u64,
    pub visits_water: u64,
    pub visits_shade: u64,
    /// Recovery after every season switch inside the log, in order.
    #[serde(skip)]
    pub recovery_times: Vec<f64>,
}

impl MetricsRow {
    pub fn columns(&self) -> [f64; 10] {
        [
            self.survival_steps as f64,
            self.viability_fraction,
            self.mean_drive,
            self.entropy_satiated,
            self.entropy_deficit,
            self.recovery_time,
            self.retention,
            self.visits_food as f64,
            self.visits_water as f64,
            self.visits_shade as f64,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub values: [f64; 10],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
    pub summary: Vec<SummaryRow>,
}

impl MetricsTable {
    /// Sorts rows by seed and appends mean, sd and median rows.
    pub fn from_rows(mut rows: Vec<MetricsRow>) -> Self {
        rows.sort_by_key(|r| r.seed);
        let summary = if rows.is_empty() {
            Vec::new()
        } else {
            let cols: Vec<[f64; 10]> = rows.iter().map(MetricsRow::columns).collect();
            let reduce = |f: fn(&[f64]) -> f64| {
                let mut out = [0.0; 10];
                for (c, slot) in out.iter_mut().enumerate() {
                    let column: Vec<f64> = cols.iter().map(|r| r[c]).collect();
                    *slot = f(&column);
                }
                out
            };
            vec![
                SummaryRow { label: "mean".into(), values: reduce(mean) },
                SummaryRow { label: "sd".into(), values: reduce(sample_sd) },
                SummaryRow { label: "median".into(), values: reduce(median) },
            ]
        };
        Self { rows, summary }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = super::export::METRICS_HEADER
            .split(',')
            .skip(1)
            .position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.columns()[idx]).collect())
    }
}

/// Mean of the finite entries; NaN if there are none.
pub fn mean(xs: &[f64]) -> f64 {
    let finite: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    if finite.is_empty() {
        return f64::NAN;
    }
    finite.iter().sum::<f64>() / finite.len() as f64
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    let finite: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    if finite.len() < 2 {
        return if finite.len() == 1 { 0.0 } else { f64::NAN };
    }
    let m = mean(&finite);
    let ss: f64 = finite.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (finite.len() - 1) as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut finite: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    if finite.is_empty() {
        return f64::NAN;
    }
    finite.sort_by(f64::total_cmp);
    let n = finite.len();
    if n % 2 == 1 {
        finite[n / 2]
    } else {
        (finite[n / 2 - 1] + finite[n / 2]) / 2.0
    }
}

/// Viability fraction over steps `[from, to)`; steps missing from the log count as not viable.
fn window_viability(log: &EpisodeLog, from: usize, to: usize) -> f64 {
    if to <= from {
        return f64::NAN;
    }
    let viable = log
        .records
        .iter()
        .skip(from)
        .take(to - from)
        .filter(|r| r.in_viability)
        .count();
    viable as f64 / (to - from) as f64
}

/// Steps at which the active season changes, within `[1, horizon)`.
pub fn season_switches(schedule: &SeasonSchedule, horizon: u64) -> Vec<u64> {
    (1..horizon)
        .filter(|&t| advance_season(schedule, t) != advance_season(schedule, t - 1))
        .collect()
}

/// Recovery time after a switch at step `switch` (index into the drive series).
pub fn recovery_time(drives: &[f64], switch: usize) -> f64 {
    if switch < RECOVERY_WINDOW || switch >= drives.len() {
        return f64::NAN;
    }
    let before = mean(&drives[switch - RECOVERY_WINDOW..switch]);
    let limit = before * (1.0 + RECOVERY_TOLERANCE);
    let mut sum: f64 = 0.0;
    for t in switch..drives.len() {
        sum += drives[t];
        if t >= switch + RECOVERY_WINDOW {
            sum -= drives[t - RECOVERY_WINDOW];
        }
        if t + 1 - switch >= RECOVERY_WINDOW && sum / RECOVERY_WINDOW as f64 <= limit {
            return (t + 1 - switch) as f64;
        }
    }
    (drives.len() - switch) as f64
}

pub fn compute_metrics(
    log: &EpisodeLog,
    schedule: &SeasonSchedule,
    layouts: &[&[Tag]],
    cols: usize,
    eval_steps: u64,
) -> MetricsRow {
    let n = log.records.len();
    let viable = log.records.iter().filter(|r| r.in_viability).count();
    let drives: Vec<f64> = log.records.iter().map(|r| r.drive).collect();

    let before = log.drive_before();
    let pick = |keep: fn(f64) -> bool| {
        let vals: Vec<f64> = log
            .records
            .iter()
            .zip(&before)
            .filter(|(_, d)| keep(**d))
            .map(|(r, _)| r.entropy)
            .collect();
        mean(&vals)
    };

    let switches = season_switches(schedule, eval_steps);
    let recovery_times: Vec<f64> = switches
        .iter()
        .map(|&s| recovery_time(&drives, s as usize))
        .collect();
    let first_season = advance_season(schedule, 0);
    let return_to_first = switches
        .iter()
        .position(|&s| advance_season(schedule, s) == first_season);
    let recovery = return_to_first.map_or(f64::NAN, |i| recovery_times[i]);

    let retention = match return_to_first {
        Some(i) => {
            let first_visit = switches[0] as usize;
            let second_start = switches[i] as usize;
            let second_end = switches
                .get(i + 1)
                .map_or(eval_steps as usize, |&s| s as usize)
                .min(second_start + first_visit);
            let a1 = window_viability(log, 0, first_visit);
            let a2 = window_viability(log, second_start, second_end);
            if a1 > 0.0 {
                a2 / a1
            } else {
                f64::NAN
            }
        }
        None => f64::NAN,
    };

    let mut visits = BTreeMap::new();
    for r in &log.records {
        let tag = layouts[r.season][r.pos.row * cols + r.pos.col];
        *visits.entry(tag).or_insert(0u64) += 1;
    }

    MetricsRow {
        seed: log.seed,
        survival_steps: n as u64,
        viability_fraction: viable as f64 / eval_steps as f64,
        mean_drive: mean(&drives),
        entropy_satiated: pick(|d| d < SATIATED_DRIVE),
        entropy_deficit: pick(|d| d > DEFICIT_DRIVE),
        recovery_time: recovery,
        retention,
        visits_food: visits.get(&Tag::Food).copied().unwrap_or(0),
        visits_water: visits.get(&Tag::Water).copied().unwrap_or(0),
        visits_shade: visits.get(&Tag::Shade).copied().unwrap_or(0),
        recovery_times,
    }
}

/// Mean policy entropy per decision position, split into satiated and deficit
/// decisions. Returns positions where both kinds were observed.
pub fn entropy_by_position(logs: &[EpisodeLog]) -> Vec<(Pos, f64, f64)> {
    let mut sat: BTreeMap<Pos, Vec<f64>> = BTreeMap::new();
    let mut def: BTreeMap<Pos, Vec<f64>> = BTreeMap::new();
    for log in logs {
        for ((r, d), pos) in log.records.iter().zip(log.drive_before()).zip(log.pos_before()) {
            if d < SATIATED_DRIVE {
                sat.entry(pos).or_default().push(r.entropy);
            } else if d > DEFICIT_DRIVE {
                def.entry(pos).or_default().push(r.entropy);
            }
        }
    }
    sat.iter()
        .filter_map(|(pos, s)| def.get(pos).map(|d| (*pos, mean(s), mean(d))))
        .collect()
}
