//! Seeded ensembles of optimal-strategy paths and the statistical checks of
//! the model's price predictions.
//!
//! Three claims about the shadow price are testable on simulated data:
//!
//! * the discounted price is a martingale, so the unconditional mean obeys
//!   `E[p_t] = p_0 e^{rt}` exactly ([`martingale_test`]);
//! * conditional on the unexplored area not being exhausted, the mean price
//!   grows strictly slower than the interest rate
//!   ([`conditional_growth_check`]);
//! * the price jump at the exhaustion episode is always upward, while
//!   interior episodes jump in either direction ([`exhaustion_jump_check`]).
//!
//! Path generation is embarrassingly parallel over counter-based RNG
//! streams; aggregation is a sequential reduction in stream order with
//! compensated summation, so results are bit-identical across thread
//! counts.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::ValueSurface;
use crate::strategy::{sample_path, simulate_path, EventKind, Path, RngStream, SamplePoint};

/// Ensemble run parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnsembleSpec {
    pub x0: f64,
    pub r0: f64,
    pub n_paths: usize,
    pub horizon: f64,
    pub base_seed: u64,
    /// Number of equally spaced sampling times on `[0, horizon]`.
    pub time_points: usize,
    /// Conditional means are reported only while the surviving fraction is
    /// at least this floor.
    pub survival_floor: f64,
}

impl EnsembleSpec {
    pub fn new(x0: f64, r0: f64, n_paths: usize, horizon: f64, base_seed: u64) -> Self {
        EnsembleSpec {
            x0,
            r0,
            n_paths,
            horizon,
            base_seed,
            time_points: 200,
            survival_floor: 0.005,
        }
    }

    pub fn with_time_points(mut self, n: usize) -> Self {
        self.time_points = n;
        self
    }
}

/// Mean, standard error and quantile bands of one sampled series.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesStats {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub q05: Vec<f64>,
    pub q25: Vec<f64>,
    pub q50: Vec<f64>,
    pub q75: Vec<f64>,
    pub q95: Vec<f64>,
}

/// Time-gridded ensemble statistics.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    /// Fraction of paths that have not exhausted the area by each time.
    pub survival: Vec<f64>,
    pub price: SeriesStats,
    pub reserves: SeriesStats,
    pub explored_area: SeriesStats,
    pub consumption_rate: SeriesStats,
    /// Mean price over surviving paths; absent below the survival floor.
    pub price_mean_conditional: Vec<Option<f64>>,
    pub price_stderr_conditional: Vec<Option<f64>>,
    /// Mean price over exhausted paths; absent when no path has exhausted.
    pub price_mean_exhausted: Vec<Option<f64>>,
    pub survival_floor: f64,
}

/// A simulated ensemble: retained paths plus aggregated statistics.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub spec: EnsembleSpec,
    pub stats: EnsembleStats,
    pub paths: Vec<Path>,
    /// Initial shadow price `V_R(x0, r0)`.
    pub p0: f64,
    /// Interest rate, copied from the model for the statistical reports.
    pub interest_rate: f64,
}

/// Compensated (Neumaier) accumulator: the reduction order is fixed, and
/// compensation keeps it reproducible and accurate at large path counts.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mut acc = Compensated::default();
    for &v in values {
        acc.add(v);
    }
    let mean = acc.value() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let mut ss = Compensated::default();
    for &v in values {
        let d = v - mean;
        ss.add(d * d);
    }
    let var = ss.value() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Linear-interpolation quantile on a sorted slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n as f64 - 1.0) * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn series_stats(per_time: &[Vec<f64>]) -> SeriesStats {
    let nt = per_time.len();
    let mut stats = SeriesStats {
        mean: vec![0.0; nt],
        stderr: vec![0.0; nt],
        q05: vec![0.0; nt],
        q25: vec![0.0; nt],
        q50: vec![0.0; nt],
        q75: vec![0.0; nt],
        q95: vec![0.0; nt],
    };
    let quantiles: Vec<[f64; 5]> = per_time
        .par_iter()
        .map(|vals| {
            let mut sorted = vals.clone();
            sorted.sort_unstable_by(f64::total_cmp);
            [
                quantile_sorted(&sorted, 0.05),
                quantile_sorted(&sorted, 0.25),
                quantile_sorted(&sorted, 0.50),
                quantile_sorted(&sorted, 0.75),
                quantile_sorted(&sorted, 0.95),
            ]
        })
        .collect();
    for it in 0..nt {
        let (mean, stderr) = mean_stderr(&per_time[it]);
        stats.mean[it] = mean;
        stats.stderr[it] = stderr;
        stats.q05[it] = quantiles[it][0];
        stats.q25[it] = quantiles[it][1];
        stats.q50[it] = quantiles[it][2];
        stats.q75[it] = quantiles[it][3];
        stats.q95[it] = quantiles[it][4];
    }
    stats
}

/// Simulates `n_paths` independent paths on streams
/// `base_seed x {0, .., n-1}`, samples them on the time grid and
/// aggregates. Any path error aborts the whole run; partial results are
/// never returned.
pub fn run_ensemble(surface: &ValueSurface, spec: &EnsembleSpec) -> Result<Ensemble> {
    if spec.n_paths == 0 {
        return Err(Error::domain("n_paths must be >= 1"));
    }
    if spec.time_points < 2 {
        return Err(Error::domain("time_points must be >= 2"));
    }
    let nt = spec.time_points;
    let times: Vec<f64> = (0..nt)
        .map(|i| spec.horizon * i as f64 / (nt - 1) as f64)
        .collect();

    let paths: Vec<Path> = (0..spec.n_paths)
        .into_par_iter()
        .map(|i| {
            simulate_path(
                surface,
                spec.x0,
                spec.r0,
                RngStream::new(spec.base_seed, i as u64),
                spec.horizon,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let samples: Vec<Vec<SamplePoint>> = paths
        .par_iter()
        .map(|p| sample_path(surface, p, &times))
        .collect::<Result<Vec<_>>>()?;

    let np = spec.n_paths;
    let column = |f: &dyn Fn(&SamplePoint) -> f64| -> Vec<Vec<f64>> {
        (0..nt)
            .map(|it| (0..np).map(|ip| f(&samples[ip][it])).collect())
            .collect()
    };
    let price_tm = column(&|s| s.price);
    let reserves_tm = column(&|s| s.reserves);
    let explored_tm = column(&|s| s.explored_area);
    let consumption_tm = column(&|s| s.consumption_rate);

    let mut survival = vec![0.0; nt];
    let mut cond_mean = vec![None; nt];
    let mut cond_stderr = vec![None; nt];
    let mut exhausted_mean = vec![None; nt];
    for it in 0..nt {
        let alive: Vec<f64> = (0..np)
            .filter(|&ip| !samples[ip][it].exhausted)
            .map(|ip| price_tm[it][ip])
            .collect();
        let gone: Vec<f64> = (0..np)
            .filter(|&ip| samples[ip][it].exhausted)
            .map(|ip| price_tm[it][ip])
            .collect();
        let frac = alive.len() as f64 / np as f64;
        survival[it] = frac;
        if frac >= spec.survival_floor && alive.len() >= 2 {
            let (mean, stderr) = mean_stderr(&alive);
            cond_mean[it] = Some(mean);
            cond_stderr[it] = Some(stderr);
        }
        if !gone.is_empty() {
            exhausted_mean[it] = Some(mean_stderr(&gone).0);
        }
    }

    let stats = EnsembleStats {
        times,
        survival,
        price: series_stats(&price_tm),
        reserves: series_stats(&reserves_tm),
        explored_area: series_stats(&explored_tm),
        consumption_rate: series_stats(&consumption_tm),
        price_mean_conditional: cond_mean,
        price_stderr_conditional: cond_stderr,
        price_mean_exhausted: exhausted_mean,
        survival_floor: spec.survival_floor,
    };

    let p0 = if spec.x0 > 0.0 {
        surface.price_at(spec.x0, spec.r0)?
    } else {
        surface.model().hotelling_price(spec.r0)?
    };
    Ok(Ensemble {
        spec: *spec,
        stats,
        paths,
        p0,
        interest_rate: surface.model().r(),
    })
}

/// One row of the martingale test.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MartingaleRow {
    pub time: f64,
    pub mean_price: f64,
    pub theory: f64,
    pub stderr: f64,
    pub z: f64,
    pub pass: bool,
}

/// Per-time z-test of `E[p_t] = p_0 e^{rt}`.
#[derive(Debug, Clone, Serialize)]
pub struct MartingaleReport {
    pub threshold: f64,
    pub rows: Vec<MartingaleRow>,
    pub all_pass: bool,
}

impl MartingaleReport {
    /// Row at the sampling time closest to `t`.
    pub fn row_near(&self, t: f64) -> &MartingaleRow {
        self.rows
            .iter()
            .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
            .expect("report has rows")
    }
}

/// Tests the Hotelling-in-expectation prediction: at every sampling time,
/// `|mean(p_t) - p_0 e^{rt}| <= threshold * stderr`. All paths contribute
/// (no conditioning); the default threshold is 3.
pub fn martingale_test(ensemble: &Ensemble, threshold: f64) -> MartingaleReport {
    let r = ensemble.interest_rate;
    let rows: Vec<MartingaleRow> = ensemble
        .stats
        .times
        .iter()
        .enumerate()
        .map(|(it, &t)| {
            let mean = ensemble.stats.price.mean[it];
            let stderr = ensemble.stats.price.stderr[it];
            let theory = ensemble.p0 * (r * t).exp();
            // stderr is zero at t = 0 and for deterministic ensembles;
            // round-off then decides equality
            let z = if stderr > 0.0 {
                (mean - theory) / stderr
            } else if (mean - theory).abs() <= 1e-9 * theory.abs() {
                0.0
            } else {
                f64::INFINITY
            };
            MartingaleRow {
                time: t,
                mean_price: mean,
                theory,
                stderr,
                z,
                pass: z.abs() <= threshold,
            }
        })
        .collect();
    let all_pass = rows.iter().all(|row| row.pass);
    MartingaleReport {
        threshold,
        rows,
        all_pass,
    }
}

/// Sign statistics of price jumps across exploration episodes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JumpCheck {
    pub exhaustion_events: usize,
    pub exhaustion_upward: usize,
    /// Smallest / median / largest price change at exhaustion events.
    pub exhaustion_jump_min: f64,
    pub exhaustion_jump_median: f64,
    pub exhaustion_jump_max: f64,
    pub interior_upward: usize,
    pub interior_downward: usize,
    pub all_exhaustions_upward: bool,
}

/// Checks that every exhaustion event jumped the price upward and tallies
/// the signs of interior (non-terminal) episode jumps. Vacuously passing
/// when the ensemble has no exhaustion events.
pub fn exhaustion_jump_check(ensemble: &Ensemble) -> JumpCheck {
    let mut exhaustion_jumps = Vec::new();
    let mut interior_up = 0usize;
    let mut interior_down = 0usize;
    for path in &ensemble.paths {
        for ev in &path.events {
            match ev.kind {
                EventKind::Exhaustion => {
                    exhaustion_jumps.push(ev.price_after - ev.price_before);
                }
                EventKind::ExplorationEpisode => {
                    if ev.price_after > ev.price_before {
                        interior_up += 1;
                    } else if ev.price_after < ev.price_before {
                        interior_down += 1;
                    }
                }
                EventKind::ConsumptionStart => {}
            }
        }
    }
    exhaustion_jumps.sort_unstable_by(f64::total_cmp);
    let n = exhaustion_jumps.len();
    let upward = exhaustion_jumps.iter().filter(|&&d| d > 0.0).count();
    JumpCheck {
        exhaustion_events: n,
        exhaustion_upward: upward,
        exhaustion_jump_min: exhaustion_jumps.first().copied().unwrap_or(f64::NAN),
        exhaustion_jump_median: if n == 0 {
            f64::NAN
        } else {
            quantile_sorted(&exhaustion_jumps, 0.5)
        },
        exhaustion_jump_max: exhaustion_jumps.last().copied().unwrap_or(f64::NAN),
        interior_upward: interior_up,
        interior_downward: interior_down,
        all_exhaustions_upward: upward == n,
    }
}

/// Least-squares slope of the log conditional mean price.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthCheck {
    pub slope: f64,
    pub stderr: f64,
    /// One-sided 95% upper confidence bound (normal approximation).
    pub upper95: f64,
    pub interest_rate: f64,
    pub window: (f64, f64),
    pub window_points: usize,
    /// True when both the point estimate and the upper bound are below the
    /// interest rate.
    pub pass: bool,
}

/// Fits `log(conditional mean price)` against time over the window where
/// the surviving fraction stays at or above `window_floor`, and checks the
/// growth rate is below the interest rate.
pub fn conditional_growth_check(ensemble: &Ensemble, window_floor: f64) -> Result<GrowthCheck> {
    let stats = &ensemble.stats;
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (it, &t) in stats.times.iter().enumerate() {
        if stats.survival[it] < window_floor {
            continue;
        }
        if let Some(mean) = stats.price_mean_conditional[it] {
            if mean > 0.0 && mean.is_finite() {
                ts.push(t);
                ys.push(mean.ln());
            }
        }
    }
    let n = ts.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "only {n} usable points above the survival floor {window_floor}"
        )));
    }
    let nf = n as f64;
    let t_mean = ts.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = ts.iter().map(|t| (t - t_mean).powi(2)).sum();
    let sxy: f64 = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| (t - t_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean;
    let sse: f64 = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| (y - intercept - slope * t).powi(2))
        .sum();
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    let upper95 = slope + 1.645 * stderr;
    let r = ensemble.interest_rate;
    Ok(GrowthCheck {
        slope,
        stderr,
        upper95,
        interest_rate: r,
        window: (ts[0], ts[n - 1]),
        window_points: n,
        pass: slope < r && upper95 < r,
    })
}
