//! Acceptance suite.
//!
//! Eleven checks pin the artifact's behavior on the two reference parameter
//! sets (A: few large deposits, a = 2.5, lambda = 2, k = 5; B: many small
//! deposits, a = 0.5, lambda = 10, k = 1; both alpha = 0.5, r = 0.02) plus
//! the sample-path set (a = 1, lambda = 5, k = 5). Each test prints one
//! PASS/FAIL line; run with `--nocapture` to see them all:
//!
//! ```text
//! cargo test --release -p wildcat --test acceptance -- --nocapture
//! ```

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use wildcat::config::parse_config;
use wildcat::ensemble::{
    conditional_growth_check, exhaustion_jump_check, martingale_test, run_ensemble, Ensemble,
    EnsembleSpec,
};
use wildcat::model::{Model, ModelParams};
use wildcat::solver::{self, SolverGrid, ValueSurface};
use wildcat::strategy::{sample_path, simulate_path, RngStream};

const ALPHA: f64 = 0.5;
const RATE: f64 = 0.02;

fn model_a() -> Model {
    ModelParams {
        alpha: ALPHA,
        r: RATE,
        a: 2.5,
        lambda: 2.0,
        k: 5.0,
    }
    .validate()
    .unwrap()
}

fn model_b() -> Model {
    ModelParams {
        alpha: ALPHA,
        r: RATE,
        a: 0.5,
        lambda: 10.0,
        k: 1.0,
    }
    .validate()
    .unwrap()
}

struct SolvedFixture {
    surface: ValueSurface,
    solve_time: Duration,
}

fn solve_default(model: &Model) -> SolvedFixture {
    let grid = SolverGrid::default_for(model, 1.0).unwrap();
    let start = Instant::now();
    let surface = solver::solve(model, grid).unwrap();
    SolvedFixture {
        surface,
        solve_time: start.elapsed(),
    }
}

fn fixture_a() -> &'static SolvedFixture {
    static FIX: OnceLock<SolvedFixture> = OnceLock::new();
    FIX.get_or_init(|| solve_default(&model_a()))
}

fn fixture_b() -> &'static SolvedFixture {
    static FIX: OnceLock<SolvedFixture> = OnceLock::new();
    FIX.get_or_init(|| solve_default(&model_b()))
}

struct EnsembleFixture {
    ensemble: Ensemble,
    run_time: Duration,
}

/// Reference ensemble for the price-dynamics criteria: set B, x0 = 1,
/// r0 at the midpoint of the consumption region, 10^4 paths to t = 100.
fn ensemble_b() -> &'static EnsembleFixture {
    static FIX: OnceLock<EnsembleFixture> = OnceLock::new();
    FIX.get_or_init(|| {
        let surface = &fixture_b().surface;
        let r0 = 0.5 * (surface.frontier().r_star_at(1.0) + surface.grid().r_max());
        let spec = EnsembleSpec::new(1.0, r0, 10_000, 100.0, 42).with_time_points(201);
        let start = Instant::now();
        let ensemble = run_ensemble(surface, &spec).unwrap();
        EnsembleFixture {
            ensemble,
            run_time: start.elapsed(),
        }
    })
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {detail}");
}

/// Criterion 1: the solver's frontier at the smallest positive x node
/// agrees with the anchor root equation to 1e-3 relative, in under a
/// second per set.
#[test]
fn criterion_01_frontier_anchor() {
    let mut detail = String::new();
    let mut pass = true;
    for (name, model) in [("A", model_a()), ("B", model_b())] {
        let start = Instant::now();
        let r0 = solver::frontier_at_zero(&model).unwrap();
        let r_step = (model.a() / 50.0).min(0.01);
        let r_max = 1.25 * r0 + model.a() + r_step;
        let grid = SolverGrid::regular(1e-3, 5e-4, r_max, r_step).unwrap();
        let surface = solver::solve(&model, grid).unwrap();
        let elapsed = start.elapsed();
        let dev = (surface.frontier().r_star()[1] - r0).abs() / r0;
        pass &= dev <= 1e-3 && elapsed < Duration::from_secs(1);
        detail.push_str(&format!("set {name}: dev {dev:.2e} in {elapsed:?}; "));
    }
    report("1 frontier anchor", pass, &detail);
}

/// Criterion 2: the frontier is strictly decreasing and stays between the
/// a-priori lower curve and upper constant; the default solve finishes in
/// under a minute single-threaded.
#[test]
fn criterion_02_frontier_monotonicity_and_bounds() {
    let mut detail = String::new();
    let mut pass = true;
    for (name, model, fix) in [("A", model_a(), fixture_a()), ("B", model_b(), fixture_b())] {
        let fr = fix.surface.frontier();
        let strictly_decreasing = fr.r_star().windows(2).all(|w| w[1] < w[0]);
        let upper = solver::consumption_upper_bound(&model, 1.0).unwrap();
        let mut in_bounds = true;
        for (j, &x) in fr.x_nodes().iter().enumerate().skip(1) {
            let lower = solver::exploration_lower_bound(&model, x).unwrap();
            let rs = fr.r_star()[j];
            in_bounds &= rs >= lower - 1e-9 && rs <= upper;
        }
        let in_time = fix.solve_time < Duration::from_secs(60);
        pass &= strictly_decreasing && in_bounds && in_time;
        detail.push_str(&format!(
            "set {name}: decreasing {strictly_decreasing}, bounds {in_bounds} (upper {upper:.1}), solve {:?}; ",
            fix.solve_time
        ));
    }
    report("2 frontier monotonicity and bounds", pass, &detail);
}

/// Criterion 3: U(R) <= V(x, R) <= E[U(R + a N_x)] at every grid node.
#[test]
fn criterion_03_value_sandwich() {
    let mut detail = String::new();
    let mut pass = true;
    for (name, model, fix) in [("A", model_a(), fixture_a()), ("B", model_b(), fixture_b())] {
        let surface = &fix.surface;
        let grid = surface.grid();
        let mut worst_low = 0.0f64;
        let mut worst_high = 0.0f64;
        for (ix, &x) in grid.x_nodes().iter().enumerate() {
            for (ir, &r) in grid.r_nodes().iter().enumerate() {
                let v = surface.v_node(ix, ir);
                let low = model.hotelling_value(r).unwrap();
                let high = model.full_information_value(x, r, 1e-10).unwrap();
                worst_low = worst_low.max(low - v);
                worst_high = worst_high.max(v - high);
            }
        }
        let ok = worst_low <= 1e-9 && worst_high <= 1e-9;
        pass &= ok;
        detail.push_str(&format!(
            "set {name}: max underflow {worst_low:.2e}, max overflow {worst_high:.2e}; "
        ));
    }
    report("3 value sandwich", pass, &detail);
}

/// Criterion 4: residual suite within thresholds at the default grid, and
/// every residual shrinks by at least 1.8x when both steps are halved.
#[test]
fn criterion_04_residual_suite() {
    let mut detail = String::new();
    let mut pass = true;
    for (name, fix) in [("A", fixture_a()), ("B", fixture_b())] {
        let rep = solver::hjb_residuals(&fix.surface).unwrap();
        let ok = rep.max_consumption_residual <= 1e-2
            && rep.max_exploration_residual <= 1e-3
            && rep.max_classic_residual <= 1e-2
            && rep.smooth_pasting_gap <= 1e-2;
        pass &= ok;
        detail.push_str(&format!(
            "set {name}: cons {:.1e} expl {:.1e} classic {:.1e} pasting {:.1e}; ",
            rep.max_consumption_residual,
            rep.max_exploration_residual,
            rep.max_classic_residual,
            rep.smooth_pasting_gap
        ));
    }

    // refinement study on set B
    let model = model_b();
    let coarse = solver::hjb_residuals(&fixture_b().surface).unwrap();
    let grid = {
        let base = fixture_b().surface.grid();
        SolverGrid::regular(1.0, base.x_step() / 2.0, base.r_max(), base.r_step() / 2.0).unwrap()
    };
    let fine = solver::hjb_residuals(&solver::solve(&model, grid).unwrap()).unwrap();
    let ratios = [
        coarse.max_consumption_residual / fine.max_consumption_residual,
        coarse.max_exploration_residual / fine.max_exploration_residual,
        coarse.max_classic_residual / fine.max_classic_residual,
        coarse.smooth_pasting_gap / fine.smooth_pasting_gap,
    ];
    let shrink_ok = ratios.iter().all(|&r| r >= 1.8);
    pass &= shrink_ok;
    detail.push_str(&format!(
        "halving ratios {:.2}/{:.2}/{:.2}/{:.2} (>= 1.8)",
        ratios[0], ratios[1], ratios[2], ratios[3]
    ));
    report("4 residual suite", pass, &detail);
}

/// Criterion 5: the dynamic-programming fixed point (6 rounds) matches the
/// marching solver to 1e-2 relative at every node of a coarse grid with
/// x_max = 0.3 (set B), within five minutes.
#[test]
fn criterion_05_dpp_oracle() {
    let model = model_b();
    let r0 = solver::frontier_at_zero(&model).unwrap();
    let grid = SolverGrid::regular(0.3, 0.01, 1.25 * r0 + model.a() + 0.02, 0.02).unwrap();
    let surface = solver::solve(&model, grid.clone()).unwrap();
    let start = Instant::now();
    let dpp = solver::dpp_fixed_point(&model, grid.clone(), 6).unwrap();
    let elapsed = start.elapsed();
    let mut worst = 0.0f64;
    for ix in 0..grid.x_nodes().len() {
        for ir in 0..grid.r_nodes().len() {
            let v = surface.v_node(ix, ir);
            let gap = (v - dpp.value_node(ix, ir)).abs() / v.max(1e-12);
            worst = worst.max(gap);
        }
    }
    let pass = worst <= 1e-2 && elapsed < Duration::from_secs(300);
    report(
        "5 dpp oracle equivalence",
        pass,
        &format!("max relative gap {worst:.2e} in {elapsed:?}"),
    );
}

/// Criterion 6: Hotelling in expectation — at t = 25, 50, 100 the ensemble
/// mean price is within three standard errors of p0 e^{rt}.
#[test]
fn criterion_06_martingale() {
    let fix = ensemble_b();
    let in_time = fix.run_time < Duration::from_secs(120);
    let rep = martingale_test(&fix.ensemble, 3.0);
    let mut detail = String::new();
    let mut pass = in_time;
    for t in [25.0, 50.0, 100.0] {
        let row = rep.row_near(t);
        pass &= row.pass;
        detail.push_str(&format!("t={t}: z={:.2}; ", row.z));
    }
    detail.push_str(&format!("ensemble in {:?}", fix.run_time));
    report("6 martingale", pass, &detail);
}

/// Criterion 7: conditional on survival, the fitted growth rate of the mean
/// price (window: survival >= 20%) is below the interest rate, upper 95%
/// bound included.
#[test]
fn criterion_07_conditional_growth() {
    let fix = ensemble_b();
    let growth = conditional_growth_check(&fix.ensemble, 0.2).unwrap();
    report(
        "7 conditional growth",
        growth.pass,
        &format!(
            "slope {:.5} (upper95 {:.5}) vs r = {:.3} over t in [{:.1}, {:.1}]",
            growth.slope, growth.upper95, growth.interest_rate, growth.window.0, growth.window.1
        ),
    );
}

/// Criterion 8: every exhaustion event jumps the price upward (set B
/// ensemble); interior episodes jump both ways (set A ensemble).
#[test]
fn criterion_08_exhaustion_jump() {
    let check_b = exhaustion_jump_check(&ensemble_b().ensemble);
    let mut pass = check_b.exhaustion_events > 0 && check_b.all_exhaustions_upward;

    let surface_a = &fixture_a().surface;
    let r0 = 0.5 * (surface_a.frontier().r_star_at(1.0) + surface_a.grid().r_max());
    let spec = EnsembleSpec::new(1.0, r0, 1000, 300.0, 42).with_time_points(201);
    let ens_a = run_ensemble(surface_a, &spec).unwrap();
    let check_a = exhaustion_jump_check(&ens_a);
    pass &= check_a.interior_upward > 0 && check_a.interior_downward > 0;
    report(
        "8 exhaustion jump",
        pass,
        &format!(
            "set B: {}/{} exhaustions upward; set A interior jumps {} up / {} down",
            check_b.exhaustion_upward,
            check_b.exhaustion_events,
            check_a.interior_upward,
            check_a.interior_downward
        ),
    );
}

/// Criterion 9: plotted against explored area, the set A and set B
/// frontiers cross exactly once on the solved domain.
#[test]
fn criterion_09_frontier_crossing() {
    let fa = &fixture_a().surface;
    let fb = &fixture_b().surface;
    let mut crossings = 0;
    let mut last_sign = 0i8;
    let mut cross_at = f64::NAN;
    for i in 1..=1000 {
        let x = i as f64 * 1e-3;
        let diff = fa.frontier().r_star_at(x) - fb.frontier().r_star_at(x);
        let sign = if diff > 0.0 { 1 } else { -1 };
        if last_sign != 0 && sign != last_sign {
            crossings += 1;
            cross_at = x;
        }
        last_sign = sign;
    }
    report(
        "9 frontier crossing",
        crossings == 1,
        &format!("{crossings} crossing(s), at unexplored area {cross_at:.3}"),
    );
}

/// Criterion 10: along every consumption segment of 100 seeded set-B paths
/// the sampled price obeys p(t2)/p(t1) = e^{r (t2 - t1)} to 1e-6 relative.
#[test]
fn criterion_10_within_segment_hotelling() {
    let surface = &fixture_b().surface;
    let r0 = 0.5 * (surface.frontier().r_star_at(1.0) + surface.grid().r_max());
    let horizon = 100.0;
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for stream in 0..100 {
        let path = simulate_path(surface, 1.0, r0, RngStream::new(42, stream), horizon).unwrap();
        for seg in &path.segments {
            let end = if seg.duration.is_finite() {
                (seg.start_time + seg.duration).min(horizon)
            } else {
                horizon
            };
            let span = end - seg.start_time;
            if span <= 1e-9 {
                continue;
            }
            let t1 = seg.start_time + 0.25 * span;
            let t2 = seg.start_time + 0.75 * span;
            let pts = sample_path(surface, &path, &[t1, t2]).unwrap();
            let expected = (RATE * (t2 - t1)).exp();
            let rel = (pts[1].price / pts[0].price / expected - 1.0).abs();
            worst = worst.max(rel);
            checked += 1;
        }
    }
    report(
        "10 within-segment hotelling rule",
        worst <= 1e-6 && checked > 100,
        &format!("max relative deviation {worst:.2e} over {checked} segments"),
    );
}

/// Criterion 11: the ensemble command is reproducible — byte-identical
/// exports across repeated runs and across thread counts.
#[test]
fn criterion_11_reproducibility() {
    let cfg = parse_config(
        r#"
[model]
alpha = 0.5
r = 0.02
a = 0.5
lambda = 10.0
k = 1.0

[grid]
x_max = 1.0

[simulation]
x0 = 1.0
n_paths = 500
horizon = 100.0
base_seed = 42
time_points = 51
"#,
    )
    .unwrap();
    let run_with_threads = |threads: usize, dir: &std::path::Path| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| wildcat::commands::cmd_ensemble(&cfg, dir, true))
            .unwrap()
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let d3 = tempfile::tempdir().unwrap();
    let f1 = run_with_threads(1, d1.path());
    let f2 = run_with_threads(1, d2.path());
    let f3 = run_with_threads(4, d3.path());
    let mut pass = true;
    for ((a, b), c) in f1.iter().zip(&f2).zip(&f3) {
        let bytes_a = std::fs::read(a).unwrap();
        pass &= bytes_a == std::fs::read(b).unwrap();
        pass &= bytes_a == std::fs::read(c).unwrap();
    }
    report(
        "11 reproducibility",
        pass,
        "repeat run and 4-thread run byte-identical to the single-thread run",
    );
}
