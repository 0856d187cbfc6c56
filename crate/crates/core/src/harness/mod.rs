//! Configuration, experiment execution, metrics and persistence.

mod config;
mod export;
mod metrics;
mod probes;
mod run;
mod stats;
mod verify;

use std::path::Path;

use log::info;
use rayon::prelude::*;

pub use config::{BlanketConfig, ExperimentConfig};
pub use export::{
    line_chart_svg, log_csv, log_file_name, metrics_csv, write_file, write_log, write_metrics,
    Series, LOG_HEADER, METRICS_HEADER,
};
pub use metrics::{
    compute_metrics, entropy_by_position, mean, median, recovery_time, sample_sd,
    season_switches, MetricsRow, MetricsTable, SummaryRow, DEFICIT_DRIVE, RECOVERY_TOLERANCE,
    RECOVERY_WINDOW, SATIATED_DRIVE,
};
pub use probes::{goal_switch_probe, GoalSwitchOutcome, PROBE_HIGH, PROBE_LOW, PROBE_MAX_STEPS};
pub use run::{run, EpisodeLog, Runner, StepRecord};
pub use stats::{binomial_upper_tail, sign_test, SignTest};
pub use verify::{verify_blanket, BlanketReport, VariantReport};

use crate::error::{Error, Result};

pub const METRICS_FILE: &str = "metrics.csv";

pub fn metrics_for(config: &ExperimentConfig, log: &EpisodeLog) -> Result<MetricsRow> {
    let env = config.build_env()?;
    let layouts: Vec<&[crate::mdp::Tag]> = (0..env.season_count()).map(|s| env.layout(s)).collect();
    Ok(compute_metrics(
        log,
        &config.env.schedule,
        &layouts,
        config.env.grid.cols,
        config.eval_steps,
    ))
}

/// Runs every seed, optionally on `jobs` threads. The result does not depend on `jobs`.
pub fn sweep_logs(config: &ExperimentConfig, jobs: usize) -> Result<Vec<EpisodeLog>> {
    config.validate()?;
    let work = |seed: &u64| run(config, *seed);
    let logs: Vec<Result<EpisodeLog>> = if jobs <= 1 {
        config.seeds.iter().map(work).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
        pool.install(|| config.seeds.par_iter().map(work).collect())
    };
    let mut logs = logs.into_iter().collect::<Result<Vec<_>>>()?;
    logs.sort_by_key(|l| l.seed);
    Ok(logs)
}

pub fn sweep(config: &ExperimentConfig, jobs: usize) -> Result<MetricsTable> {
    let logs = sweep_logs(config, jobs)?;
    table_from_logs(config, &logs)
}

pub fn table_from_logs(config: &ExperimentConfig, logs: &[EpisodeLog]) -> Result<MetricsTable> {
    let rows = logs
        .iter()
        .map(|log| metrics_for(config, log))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsTable::from_rows(rows))
}

/// `run` plus persistence of the log and its metrics row.
pub fn run_to_dir(config: &ExperimentConfig, seed: u64, out: &Path) -> Result<EpisodeLog> {
    let log = run(config, seed)?;
    write_log(&log, out.join(log_file_name(&log)))?;
    let table = MetricsTable::from_rows(vec![metrics_for(config, &log)?]);
    write_metrics(&table, out.join(format!("metrics_seed{seed}.csv")))?;
    info!(
        "seed {seed}: {} steps, status {:?}",
        log.records.len(),
        log.status
    );
    Ok(log)
}

/// `sweep` plus persistence of every log and the metrics table.
pub fn sweep_to_dir(config: &ExperimentConfig, jobs: usize, out: &Path) -> Result<MetricsTable> {
    let logs = sweep_logs(config, jobs)?;
    for log in &logs {
        write_log(log, out.join(log_file_name(log)))?;
    }
    let table = table_from_logs(config, &logs)?;
    write_metrics(&table, out.join(METRICS_FILE))?;
    Ok(table)
}
