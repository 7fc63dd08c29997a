//! Command implementations behind the CLI surface.
//!
//! Each command takes a parsed [`RunConfig`], writes its files into the
//! output directory and returns the list of files written. All outputs are
//! deterministic given the configuration.

use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::ensemble::{run_ensemble, EnsembleSpec};
use crate::error::{Error, Result};
use crate::export::{
    self, EVENT_COLUMNS, FRONTIER_COLUMNS, SERIES_COLUMNS, STATS_COLUMNS, SURFACE_COLUMNS,
};
use crate::model::Model;
use crate::solver::{self, SolverGrid, ValueSurface};
use crate::strategy::{sample_path, simulate_path, RngStream};

fn build_model(config: &RunConfig) -> Result<Model> {
    config.model.validate()
}

fn build_grid(config: &RunConfig, model: &Model) -> Result<SolverGrid> {
    let g = &config.grid;
    let (x_default, r_default) = SolverGrid::default_steps(model);
    let x_step = g.x_step.unwrap_or(x_default);
    let r_step = g.r_step.unwrap_or(r_default);
    let r_max = match g.r_max {
        Some(v) => v,
        None => SolverGrid::default_r_max(model, r_step)?,
    };
    SolverGrid::regular(g.x_max, x_step, r_max, r_step)
}

fn solve_surface(config: &RunConfig) -> Result<(Model, ValueSurface)> {
    let model = build_model(config)?;
    let grid = build_grid(config, &model)?;
    let surface = solver::solve(&model, grid)?;
    Ok((model, surface))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// Starting reserves: configured value, or the midpoint of the consumption
/// region at `x0` within the grid.
fn resolve_r0(config: &RunConfig, surface: &ValueSurface) -> f64 {
    config.simulation.r0.unwrap_or_else(|| {
        0.5 * (surface.frontier().r_star_at(config.simulation.x0) + surface.grid().r_max())
    })
}

/// Solves the surface and writes `surface.csv`, `frontier.csv` and the
/// metadata sidecar.
pub fn cmd_solve(config: &RunConfig, out_dir: &Path, quiet: bool) -> Result<Vec<PathBuf>> {
    let (model, surface) = solve_surface(config)?;
    ensure_dir(out_dir)?;
    let surface_path = out_dir.join("surface.csv");
    export::write_csv(&surface_path, &SURFACE_COLUMNS, &export::surface_rows(&surface)?)?;
    let frontier_path = out_dir.join("frontier.csv");
    export::write_csv(&frontier_path, &FRONTIER_COLUMNS, &export::frontier_rows(&surface))?;
    let meta = export::write_metadata(
        out_dir,
        "solve",
        config,
        &model,
        &surface,
        config.simulation.base_seed,
        &[
            ("surface.csv", &SURFACE_COLUMNS),
            ("frontier.csv", &FRONTIER_COLUMNS),
        ],
    )?;
    if !quiet {
        println!(
            "solved {} x {} nodes; frontier anchor R*(0) = {:.6}",
            surface.grid().x_nodes().len(),
            surface.grid().r_nodes().len(),
            surface.frontier().r0()
        );
    }
    Ok(vec![surface_path, frontier_path, meta])
}

/// Solves and writes only the frontier table `(x, r_star, p_star)` with the
/// analytic anchor as its first row.
pub fn cmd_frontier(config: &RunConfig, out_dir: &Path, quiet: bool) -> Result<Vec<PathBuf>> {
    let (model, surface) = solve_surface(config)?;
    ensure_dir(out_dir)?;
    let frontier_path = out_dir.join("frontier.csv");
    export::write_csv(&frontier_path, &FRONTIER_COLUMNS, &export::frontier_rows(&surface))?;
    let meta = export::write_metadata(
        out_dir,
        "frontier",
        config,
        &model,
        &surface,
        config.simulation.base_seed,
        &[("frontier.csv", &FRONTIER_COLUMNS)],
    )?;
    if !quiet {
        println!(
            "frontier: R*(0) = {:.6}, P*(0) = {:.6}, R*({}) = {:.6}",
            surface.frontier().r0(),
            surface.frontier().p_star()[0],
            surface.x_max(),
            surface.frontier().r_star().last().unwrap()
        );
    }
    Ok(vec![frontier_path, meta])
}

/// Simulates a single path (stream 0 of the base seed) and writes the event
/// and sampled-series tables.
pub fn cmd_simulate(config: &RunConfig, out_dir: &Path, quiet: bool) -> Result<Vec<PathBuf>> {
    let (model, surface) = solve_surface(config)?;
    ensure_dir(out_dir)?;
    let sim = &config.simulation;
    let r0 = resolve_r0(config, &surface);
    let path = simulate_path(
        &surface,
        sim.x0,
        r0,
        RngStream::new(sim.base_seed, 0),
        sim.horizon,
    )?;
    let times: Vec<f64> = (0..sim.time_points)
        .map(|i| sim.horizon * i as f64 / (sim.time_points - 1) as f64)
        .collect();
    let samples = sample_path(&surface, &path, &times)?;

    let events_path = out_dir.join("events.csv");
    export::write_csv(&events_path, &EVENT_COLUMNS, &export::event_rows(&path))?;
    let series_path = out_dir.join("series.csv");
    export::write_csv(&series_path, &SERIES_COLUMNS, &export::series_rows(&samples))?;
    let meta = export::write_metadata(
        out_dir,
        "simulate",
        config,
        &model,
        &surface,
        sim.base_seed,
        &[
            ("events.csv", &EVENT_COLUMNS),
            ("series.csv", &SERIES_COLUMNS),
        ],
    )?;
    if !quiet {
        println!(
            "path: {} events, {} finds, exhaustion {}",
            path.events.len(),
            path.total_finds,
            match path.exhaustion_time {
                Some(t) => format!("at t = {t:.3}"),
                None => "not reached within horizon".to_string(),
            }
        );
    }
    Ok(vec![events_path, series_path, meta])
}

/// Runs a seeded ensemble and writes the long-format statistics table.
pub fn cmd_ensemble(config: &RunConfig, out_dir: &Path, quiet: bool) -> Result<Vec<PathBuf>> {
    let sim = &config.simulation;
    if sim.n_paths == 0 {
        return Err(Error::domain("ensemble requires n_paths >= 1"));
    }
    let (model, surface) = solve_surface(config)?;
    ensure_dir(out_dir)?;
    let r0 = resolve_r0(config, &surface);
    let spec = EnsembleSpec::new(sim.x0, r0, sim.n_paths, sim.horizon, sim.base_seed)
        .with_time_points(sim.time_points);
    let ensemble = run_ensemble(&surface, &spec)?;

    let stats_path = out_dir.join("stats.csv");
    export::write_csv(&stats_path, &STATS_COLUMNS, &export::stats_rows(&ensemble.stats))?;
    let meta = export::write_metadata(
        out_dir,
        "ensemble",
        config,
        &model,
        &surface,
        sim.base_seed,
        &[("stats.csv", &STATS_COLUMNS)],
    )?;
    if !quiet {
        let exhausted = ensemble
            .paths
            .iter()
            .filter(|p| p.exhaustion_time.is_some())
            .count();
        println!(
            "ensemble: {} paths, {} exhausted within horizon {}, p0 = {:.6}",
            sim.n_paths, exhausted, sim.horizon, ensemble.p0
        );
    }
    Ok(vec![stats_path, meta])
}

/// One named validation check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Outcome of `validate`: solver diagnostics evaluated against fixed
/// thresholds.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

/// Runs the solver diagnostics: frontier shape and bounds, value sandwich,
/// monotonicity, concavity and the residual suite. Prints one pass/fail
/// line per check and writes `validation.json`.
pub fn cmd_validate(config: &RunConfig, out_dir: &Path, quiet: bool) -> Result<ValidationReport> {
    let (model, surface) = solve_surface(config)?;
    let grid = surface.grid();
    let fr = surface.frontier();
    let x_nodes = grid.x_nodes();
    let r_nodes = grid.r_nodes();
    let mut checks = Vec::new();
    let mut push = |name: &'static str, pass: bool, detail: String| {
        checks.push(CheckResult { name, pass, detail });
    };

    // frontier strictly decreasing and positive
    let mut max_increase = f64::NEG_INFINITY;
    let mut min_value = f64::INFINITY;
    for j in 1..fr.r_star().len() {
        max_increase = max_increase.max(fr.r_star()[j] - fr.r_star()[j - 1]);
        min_value = min_value.min(fr.r_star()[j]);
    }
    push(
        "frontier_decreasing",
        max_increase < 0.0 && min_value > 0.0,
        format!("max step {max_increase:.3e}, min level {min_value:.4}"),
    );

    // anchor continuity at the first positive node
    let anchor_dev = (fr.r_star()[1] - fr.r0()).abs() / fr.r0();
    push(
        "frontier_anchor",
        anchor_dev <= 1e-2,
        format!("|R*(x1) - R*(0)| / R*(0) = {anchor_dev:.3e}"),
    );

    // a-priori bounds
    let upper = solver::consumption_upper_bound(&model, grid.x_max())?;
    let mut bounds_ok = true;
    let mut worst = String::new();
    for (&x, &rs) in x_nodes.iter().zip(fr.r_star()).skip(1) {
        let lower = solver::exploration_lower_bound(&model, x)?;
        if rs < lower - 1e-9 || rs > upper {
            bounds_ok = false;
            worst = format!("x = {x}: R* = {rs}, bounds [{lower}, {upper}]");
            break;
        }
    }
    push(
        "frontier_bounds",
        bounds_ok,
        if bounds_ok {
            format!("R_low(x) <= R*(x) <= {upper:.4} on all nodes")
        } else {
            worst
        },
    );

    // value sandwich U <= V <= E[U(R + a N_x)]
    let mut sandwich_ok = true;
    let mut sandwich_worst = 0.0f64;
    for (ix, &x) in x_nodes.iter().enumerate() {
        for (ir, &r) in r_nodes.iter().enumerate() {
            let v = surface.v_node(ix, ir);
            let lo = model.hotelling_value_unchecked(r);
            let hi = model.full_information_value(x, r, 1e-10)?;
            let slack = 1e-9 * (1.0 + v.abs());
            if v < lo - slack || v > hi + slack {
                sandwich_ok = false;
                sandwich_worst = sandwich_worst.max((lo - v).max(v - hi));
            }
        }
    }
    push(
        "value_sandwich",
        sandwich_ok,
        if sandwich_ok {
            "U(R) <= V <= full-information value at every node".to_string()
        } else {
            format!("violated by up to {sandwich_worst:.3e}")
        },
    );

    // monotone in R and x, concave in R
    let mut mono_r = 0.0f64;
    let mut mono_x = 0.0f64;
    let mut convexity = f64::NEG_INFINITY;
    for ix in 0..x_nodes.len() {
        for ir in 0..r_nodes.len() {
            let v = surface.v_node(ix, ir);
            if ir + 1 < r_nodes.len() {
                mono_r = mono_r.max(v - surface.v_node(ix, ir + 1));
            }
            if ix + 1 < x_nodes.len() {
                mono_x = mono_x.max(v - surface.v_node(ix + 1, ir));
            }
            if ir >= 1 && ir + 1 < r_nodes.len() {
                convexity = convexity
                    .max(surface.v_node(ix, ir + 1) - 2.0 * v + surface.v_node(ix, ir - 1));
            }
        }
    }
    push(
        "value_monotone",
        mono_r <= 1e-9 && mono_x <= 1e-9,
        format!("max decrease in R {mono_r:.2e}, in x {mono_x:.2e}"),
    );
    push(
        "value_concave_in_r",
        convexity <= 1e-8,
        format!("max second difference {convexity:.2e}"),
    );

    // residual suite
    let residuals = solver::hjb_residuals(&surface)?;
    push(
        "residual_consumption",
        residuals.max_consumption_residual <= 1e-2,
        format!("{:.3e} (<= 1e-2)", residuals.max_consumption_residual),
    );
    push(
        "residual_exploration",
        residuals.max_exploration_residual <= 1e-3,
        format!("{:.3e} (<= 1e-3)", residuals.max_exploration_residual),
    );
    push(
        "residual_classic_form",
        residuals.max_classic_residual <= 1e-2,
        format!("{:.3e} (<= 1e-2)", residuals.max_classic_residual),
    );
    push(
        "smooth_pasting",
        residuals.smooth_pasting_gap <= 1e-2,
        format!("{:.3e} (<= 1e-2)", residuals.smooth_pasting_gap),
    );

    let report = ValidationReport {
        all_pass: checks.iter().all(|c| c.pass),
        checks,
    };
    if !quiet {
        for c in &report.checks {
            println!(
                "{} {}: {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
    }
    ensure_dir(out_dir)?;
    let text = serde_json::to_string_pretty(&report).expect("report serialization cannot fail");
    std::fs::write(out_dir.join("validation.json"), text + "\n")?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn quick_config() -> RunConfig {
        // deliberately small grid so command tests stay fast
        parse_config(
            r#"
[model]
alpha = 0.5
r = 0.02
a = 0.5
lambda = 10.0
k = 1.0

[grid]
x_max = 0.1
x_step = 0.005

[simulation]
x0 = 0.1
n_paths = 8
horizon = 40.0
base_seed = 7
time_points = 21
"#,
        )
        .unwrap()
    }

    #[test]
    fn solve_writes_surface_frontier_and_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let files = cmd_solve(&quick_config(), dir.path(), true).unwrap();
        assert_eq!(files.len(), 3);
        for f in &files {
            assert!(f.exists(), "{f:?}");
        }
        let surface = std::fs::read_to_string(&files[0]).unwrap();
        assert!(surface.starts_with("x,R,V,MV,region,price\n"));
        let frontier = std::fs::read_to_string(&files[1]).unwrap();
        let first_row = frontier.lines().nth(1).unwrap();
        assert!(first_row.starts_with("0.0000000000000000e0,"));
    }

    #[test]
    fn simulate_and_ensemble_write_their_tables() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = quick_config();
        let files = cmd_simulate(&cfg, dir.path(), true).unwrap();
        assert!(std::fs::read_to_string(&files[0])
            .unwrap()
            .starts_with("index,kind,time,"));
        let files = cmd_ensemble(&cfg, dir.path(), true).unwrap();
        let stats = std::fs::read_to_string(&files[0]).unwrap();
        assert!(stats.starts_with("time,statistic,value,stderr\n"));
        assert!(stats.contains("price_mean"));
        assert!(stats.contains("survival"));
    }

    #[test]
    fn ensemble_rejects_zero_paths() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = quick_config();
        cfg.simulation.n_paths = 0;
        assert!(cmd_ensemble(&cfg, dir.path(), true).is_err());
    }

    #[test]
    fn repeated_runs_are_byte_identical() {
        let cfg = quick_config();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let f1 = cmd_ensemble(&cfg, d1.path(), true).unwrap();
        let f2 = cmd_ensemble(&cfg, d2.path(), true).unwrap();
        for (a, b) in f1.iter().zip(&f2) {
            assert_eq!(
                std::fs::read(a).unwrap(),
                std::fs::read(b).unwrap(),
                "{a:?} vs {b:?}"
            );
        }
    }

    #[test]
    fn validate_passes_on_the_quick_grid() {
        let dir = tempfile::tempdir().unwrap();
        let report = cmd_validate(&quick_config(), dir.path(), true).unwrap();
        assert!(report.all_pass, "{:#?}", report.checks);
        assert!(dir.path().join("validation.json").exists());
    }
}
