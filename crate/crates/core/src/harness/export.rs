//! CSV and SVG output. Header strings are fixed contracts.

use std::fmt::Write as _;
use std::path::Path;

use super::metrics::MetricsTable;
use super::run::EpisodeLog;
use crate::error::{Error, Result};

pub const METRICS_HEADER: &str = "seed,survival_steps,viability_fraction,mean_drive,entropy_satiated,entropy_deficit,recovery_time,retention,visits_food,visits_water,visits_shade";

pub const LOG_HEADER: &str = "t,row,col,season,energy,hydration,core_temp,action,reward,drive,in_viability,tau,context_id,entropy,td_error";

pub fn metrics_csv(table: &MetricsTable) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for row in &table.rows {
        let _ = write!(out, "{}", row.seed);
        for v in row.columns() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    for s in &table.summary {
        out.push_str(&s.label);
        for v in s.values {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn log_csv(log: &EpisodeLog) -> String {
    let mut out = String::from(LOG_HEADER);
    out.push('\n');
    for r in &log.records {
        let _ = write!(out, "{},{},{},{}", r.t, r.pos.row, r.pos.col, r.season);
        for v in &r.internal {
            let _ = write!(out, ",{v}");
        }
        let _ = write!(
            out,
            ",{},{},{},{},{},{},{},",
            r.action.name(),
            r.reward,
            r.drive,
            u8::from(r.in_viability),
            r.tau,
            r.context_id,
            r.entropy
        );
        if let Some(td) = r.td_error {
            let _ = write!(out, "{td}");
        }
        out.push('\n');
    }
    out
}

pub fn write_file(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_metrics(table: &MetricsTable, path: impl AsRef<Path>) -> Result<()> {
    write_file(path, &metrics_csv(table))
}

pub fn write_log(log: &EpisodeLog, path: impl AsRef<Path>) -> Result<()> {
    write_file(path, &log_csv(log))
}

pub fn log_file_name(log: &EpisodeLog) -> String {
    format!("log_{}_seed{}.csv", log.agent.name(), log.seed)
}

/// One polyline series for [`line_chart_svg`].
pub struct Series<'a> {
    pub label: &'a str,
    pub values: Vec<f64>,
}

/// Self-contained SVG line chart, one panel per series group.
pub fn line_chart_svg(title: &str, panels: &[(&str, Vec<Series<'_>>)]) -> String {
    const WIDTH: f64 = 800.0;
    const PANEL_H: f64 = 220.0;
    const MARGIN: f64 = 50.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

    let height = MARGIN + panels.len() as f64 * (PANEL_H + MARGIN);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{MARGIN}" y="24" font-size="16">{}</text>"#, escape(title));

    for (p, (name, series)) in panels.iter().enumerate() {
        let top = MARGIN + p as f64 * (PANEL_H + MARGIN);
        let plot_w = WIDTH - 2.0 * MARGIN;
        let finite = series.iter().flat_map(|s| s.values.iter()).copied().filter(|v| v.is_finite());
        let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (lo, hi) = if lo.is_finite() { (lo, if hi > lo { hi } else { lo + 1.0 }) } else { (0.0, 1.0) };
        let longest = series.iter().map(|s| s.values.len()).max().unwrap_or(0).max(2);

        let _ = writeln!(
            svg,
            r##"<rect x="{MARGIN}" y="{top}" width="{plot_w}" height="{PANEL_H}" fill="none" stroke="#888"/>"##
        );
        let _ = writeln!(svg, r#"<text x="{MARGIN}" y="{}">{}</text>"#, top - 6.0, escape(name));
        let _ = writeln!(svg, r#"<text x="4" y="{}">{hi:.3}</text>"#, top + 10.0);
        let _ = writeln!(svg, r#"<text x="4" y="{}">{lo:.3}</text>"#, top + PANEL_H);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, WIDTH - MARGIN - 30.0, top + PANEL_H + 16.0, longest - 1);

        for (i, s) in series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let mut points = String::new();
            for (t, v) in s.values.iter().enumerate().filter(|(_, v)| v.is_finite()) {
                let x = MARGIN + plot_w * t as f64 / (longest - 1) as f64;
                let y = top + PANEL_H * (1.0 - (v - lo) / (hi - lo));
                let _ = write!(points, "{x:.2},{y:.2} ");
            }
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                points.trim_end()
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                MARGIN + 8.0 + 120.0 * i as f64,
                top + 16.0,
                escape(s.label)
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
