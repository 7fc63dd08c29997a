//! Deterministic table exports.
//!
//! Every run writes CSV tables plus one JSON metadata sidecar. Numbers are
//! printed with 17 significant digits (scientific notation), which
//! round-trips every finite f64 exactly; repeated runs of the same
//! configuration produce byte-identical files.

use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::ensemble::EnsembleStats;
use crate::error::Result;
use crate::model::Model;
use crate::solver::ValueSurface;
use crate::strategy::{Path as SimPath, SamplePoint};

/// 17 significant digits: the shortest representation guaranteed to
/// round-trip any finite f64.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut buf = String::with_capacity(rows.len() * 64 + 256);
    buf.push_str(&header.join(","));
    buf.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(buf.as_bytes())?;
    Ok(())
}

pub const SURFACE_COLUMNS: [&str; 6] = ["x", "R", "V", "MV", "region", "price"];
pub const FRONTIER_COLUMNS: [&str; 3] = ["x", "r_star", "p_star"];
pub const EVENT_COLUMNS: [&str; 11] = [
    "index",
    "kind",
    "time",
    "x_before",
    "x_after",
    "r_before",
    "r_after",
    "finds",
    "price_before",
    "price_after",
    "discounted_cost",
];
pub const SERIES_COLUMNS: [&str; 6] = [
    "time",
    "price",
    "reserves",
    "explored_area",
    "consumption_rate",
    "exhausted",
];
pub const STATS_COLUMNS: [&str; 4] = ["time", "statistic", "value", "stderr"];

/// Full surface table: one row per grid node.
pub fn surface_rows(surface: &ValueSurface) -> Result<Vec<Vec<String>>> {
    let grid = surface.grid();
    let mut rows = Vec::with_capacity(grid.x_nodes().len() * grid.r_nodes().len());
    for (ix, &x) in grid.x_nodes().iter().enumerate() {
        let r_star = surface.frontier().r_star()[ix];
        for (ir, &r) in grid.r_nodes().iter().enumerate() {
            let region = if r > r_star { "C" } else { "E" };
            let price = surface.price_at(x, r)?;
            rows.push(vec![
                format_float(x),
                format_float(r),
                format_float(surface.v_node(ix, ir)),
                format_float(surface.mv_node(ix, ir)),
                region.to_string(),
                format_float(price),
            ]);
        }
    }
    Ok(rows)
}

/// Frontier table; the first row is the analytic anchor at `x = 0`.
pub fn frontier_rows(surface: &ValueSurface) -> Vec<Vec<String>> {
    let fr = surface.frontier();
    fr.x_nodes()
        .iter()
        .zip(fr.r_star().iter().zip(fr.p_star()))
        .map(|(&x, (&rs, &ps))| vec![format_float(x), format_float(rs), format_float(ps)])
        .collect()
}

pub fn event_rows(path: &SimPath) -> Vec<Vec<String>> {
    path.events
        .iter()
        .enumerate()
        .map(|(i, ev)| {
            vec![
                i.to_string(),
                ev.kind.as_str().to_string(),
                format_float(ev.time),
                format_float(ev.x_before),
                format_float(ev.x_after),
                format_float(ev.r_before),
                format_float(ev.r_after),
                ev.finds.to_string(),
                format_float(ev.price_before),
                format_float(ev.price_after),
                format_float(ev.discounted_cost),
            ]
        })
        .collect()
}

pub fn series_rows(samples: &[SamplePoint]) -> Vec<Vec<String>> {
    samples
        .iter()
        .map(|s| {
            vec![
                format_float(s.time),
                format_float(s.price),
                format_float(s.reserves),
                format_float(s.explored_area),
                format_float(s.consumption_rate),
                if s.exhausted { "1" } else { "0" }.to_string(),
            ]
        })
        .collect()
}

/// Long-format statistics table: `(time, statistic, value, stderr)`.
/// Quantile rows carry an empty stderr; conditional rows are omitted where
/// the surviving fraction is below the reporting floor.
pub fn stats_rows(stats: &EnsembleStats) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let series = [
        ("price", &stats.price),
        ("reserves", &stats.reserves),
        ("explored_area", &stats.explored_area),
        ("consumption_rate", &stats.consumption_rate),
    ];
    for (it, &t) in stats.times.iter().enumerate() {
        let time = format_float(t);
        for (name, s) in &series {
            rows.push(vec![
                time.clone(),
                format!("{name}_mean"),
                format_float(s.mean[it]),
                format_float(s.stderr[it]),
            ]);
            for (label, q) in [
                ("q05", &s.q05),
                ("q25", &s.q25),
                ("q50", &s.q50),
                ("q75", &s.q75),
                ("q95", &s.q95),
            ] {
                rows.push(vec![
                    time.clone(),
                    format!("{name}_{label}"),
                    format_float(q[it]),
                    String::new(),
                ]);
            }
        }
        if let (Some(mean), Some(stderr)) = (
            stats.price_mean_conditional[it],
            stats.price_stderr_conditional[it],
        ) {
            rows.push(vec![
                time.clone(),
                "price_mean_conditional".to_string(),
                format_float(mean),
                format_float(stderr),
            ]);
        }
        if let Some(mean) = stats.price_mean_exhausted[it] {
            rows.push(vec![
                time.clone(),
                "price_mean_exhausted".to_string(),
                format_float(mean),
                String::new(),
            ]);
        }
        rows.push(vec![
            time.clone(),
            "survival".to_string(),
            format_float(stats.survival[it]),
            String::new(),
        ]);
    }
    rows
}

#[derive(Serialize)]
struct GridSummary {
    x_max: f64,
    x_step: f64,
    x_nodes: usize,
    r_max: f64,
    r_step: f64,
    r_nodes: usize,
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    columns: Vec<String>,
}

/// Sidecar describing one command's outputs; content is a pure function of
/// the configuration, so reruns are byte-identical.
#[derive(Serialize)]
struct Metadata<'a> {
    artifact_version: &'static str,
    command: &'a str,
    params: crate::model::ModelParams,
    derived: crate::model::DerivedConstants,
    grid: GridSummary,
    base_seed: u64,
    files: Vec<FileEntry>,
    config: &'a RunConfig,
}

#[allow(clippy::too_many_arguments)]
pub fn write_metadata(
    dir: &Path,
    command: &str,
    config: &RunConfig,
    model: &Model,
    surface: &ValueSurface,
    base_seed: u64,
    files: &[(&str, &[&str])],
) -> Result<PathBuf> {
    let grid = surface.grid();
    let meta = Metadata {
        artifact_version: crate::ARTIFACT_VERSION,
        command,
        params: model.params(),
        derived: model.derived(),
        grid: GridSummary {
            x_max: grid.x_max(),
            x_step: grid.x_step(),
            x_nodes: grid.x_nodes().len(),
            r_max: grid.r_max(),
            r_step: grid.r_step(),
            r_nodes: grid.r_nodes().len(),
        },
        base_seed,
        files: files
            .iter()
            .map(|(name, cols)| FileEntry {
                name: name.to_string(),
                columns: cols.iter().map(|c| c.to_string()).collect(),
            })
            .collect(),
        config,
    };
    let path = dir.join("metadata.json");
    let mut file = std::fs::File::create(&path)?;
    let text = serde_json::to_string_pretty(&meta).expect("metadata serialization cannot fail");
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(path)
}
