//! Simulation of the optimal bang-bang consumption-exploration strategy.
//!
//! Against a solved surface the optimal policy is fully explicit. While
//! reserves exceed the frontier the agent consumes at the exponentially
//! decaying rate
//!
//! ```text
//! c(t) = c0 e^{-r t/(1-alpha)},   c0 = V_R(x, R)^(1/(alpha-1)),
//! R(t) = R - (1-alpha)/r * c0 * (1 - e^{-r t/(1-alpha)}),
//! ```
//!
//! until `R(t)` hits `R*(x)` (the hitting time has a closed form). Then an
//! exploration episode runs in zero calendar time: exponential(lambda)
//! spacings are drawn along the unexplored interval; each find raises
//! reserves by `a`, and the episode ends as soon as reserves exceed the
//! frontier at the remaining area, or the area is exhausted. After
//! exhaustion the path is deterministic Hotelling consumption.
//!
//! Paths are generated from counter-based RNG streams: one (seed, stream)
//! pair per path, so ensembles are order-independent under parallel
//! execution and every path replays bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::ValueSurface;

/// Counter-based RNG stream: `(seed, stream_id)` reproduces the same draw
/// sequence bit-for-bit regardless of which other streams have run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Kind of a path event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    /// Path begins in the consumption region (emitted at t = 0 only).
    ConsumptionStart,
    /// Zero-time exploration episode ending inside the consumption region.
    ExplorationEpisode,
    /// Zero-time exploration episode that exhausted the unexplored area.
    Exhaustion,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::ConsumptionStart => "consumption_start",
            EventKind::ExplorationEpisode => "exploration_episode",
            EventKind::Exhaustion => "exhaustion",
        }
    }
}

/// One event on a simulated path. Exploration episodes record the state on
/// both sides of the zero-time jump; `discounted_cost` is
/// `k * (area explored) * e^{-r t}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PathEvent {
    pub kind: EventKind,
    pub time: f64,
    pub x_before: f64,
    pub x_after: f64,
    pub r_before: f64,
    pub r_after: f64,
    pub finds: u32,
    pub price_before: f64,
    pub price_after: f64,
    pub discounted_cost: f64,
}

/// One consumption interval: reserves and prices on it follow the closed
/// forms parametrized by `(x, r_start, c0)`. The terminal Hotelling segment
/// has infinite duration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConsumptionSegment {
    pub start_time: f64,
    pub duration: f64,
    pub x: f64,
    pub r_start: f64,
    pub c0: f64,
}

/// A complete realization of the optimal strategy.
#[derive(Debug, Clone, Serialize)]
pub struct Path {
    pub params: crate::model::ModelParams,
    pub x0: f64,
    pub r0: f64,
    pub stream: RngStream,
    pub horizon: f64,
    pub events: Vec<PathEvent>,
    pub segments: Vec<ConsumptionSegment>,
    /// Time of the episode that exhausted the area, if within the horizon.
    pub exhaustion_time: Option<f64>,
    pub total_finds: u32,
    /// Total discounted exploration cost `k * sum e^{-r theta_n} dX_n`.
    pub total_discounted_cost: f64,
}

/// Sampled state of a path at one time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SamplePoint {
    pub time: f64,
    pub price: f64,
    pub reserves: f64,
    pub explored_area: f64,
    pub consumption_rate: f64,
    pub exhausted: bool,
}

/// Reserves remaining after consuming for `t` from `r_start` at initial
/// rate `c0`.
pub fn reserves_after(surface: &ValueSurface, r_start: f64, c0: f64, t: f64) -> f64 {
    let m = surface.model();
    let beta = (1.0 - m.alpha()) / m.r();
    (r_start - beta * c0 * (-(-t / beta).exp_m1())).max(0.0)
}

/// Consumption rate after `t` within a segment.
pub fn consumption_rate_after(surface: &ValueSurface, c0: f64, t: f64) -> f64 {
    let m = surface.model();
    c0 * (-t * m.r() / (1.0 - m.alpha())).exp()
}

/// Optimal consumption segment starting at `(x, r_start)`.
///
/// Returns the initial rate `c0 = V_R(x, r_start)^(1/(alpha-1))` and the
/// closed-form hitting time of the frontier; the duration is infinite in
/// the exhausted regime (`x = 0`) where no frontier exists.
pub fn consumption_segment(surface: &ValueSurface, x: f64, r_start: f64) -> Result<(f64, f64)> {
    let m = surface.model();
    if x == 0.0 {
        if r_start == 0.0 {
            return Ok((0.0, f64::INFINITY));
        }
        let c0 = m
            .hotelling_price(r_start)?
            .powf(1.0 / (m.alpha() - 1.0));
        return Ok((c0, f64::INFINITY));
    }
    let r_star = surface.frontier().r_star_at(x);
    if r_start < r_star * (1.0 - 1e-9) - 1e-12 {
        return Err(Error::Region(format!(
            "consumption segment at (x={x}, R={r_start}) below the frontier {r_star}"
        )));
    }
    let c0 = surface.price_at(x, r_start)?.powf(1.0 / (m.alpha() - 1.0));
    let beta = (1.0 - m.alpha()) / m.r();
    let log_arg = 1.0 - (r_start - r_star) / (beta * c0);
    let duration = if log_arg <= 0.0 {
        f64::INFINITY
    } else {
        (-beta * log_arg.ln()).max(0.0)
    };
    Ok((c0, duration))
}

/// Outcome of one zero-time exploration episode.
struct EpisodeOutcome {
    event: PathEvent,
    x_after: f64,
    r_after: f64,
}

/// Runs one exploration episode starting at `(x, reserves)` with
/// `reserves <= R*(x)`: draws exponential spacings until a find lifts
/// reserves above the frontier at the remaining area or the area runs out.
fn exploration_episode(
    surface: &ValueSurface,
    time: f64,
    x: f64,
    reserves: f64,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeOutcome> {
    debug_assert!(x > 0.0);
    let m = surface.model();
    let spacing = Exp::new(m.lambda()).map_err(|e| Error::Numerical(e.to_string()))?;
    let price_before = surface.price_at(x, reserves)?;

    let mut x_cur = x;
    let mut r_cur = reserves;
    let mut finds = 0u32;
    loop {
        let s = spacing.sample(rng);
        if s >= x_cur {
            x_cur = 0.0;
            break;
        }
        x_cur -= s;
        r_cur += m.a();
        finds += 1;
        if r_cur > surface.frontier().r_star_at(x_cur) {
            break;
        }
    }

    let explored = x - x_cur;
    let (kind, price_after) = if x_cur == 0.0 {
        let p = if r_cur > 0.0 {
            m.hotelling_price(r_cur)?
        } else {
            f64::INFINITY
        };
        (EventKind::Exhaustion, p)
    } else {
        (EventKind::ExplorationEpisode, surface.price_at(x_cur, r_cur)?)
    };
    Ok(EpisodeOutcome {
        event: PathEvent {
            kind,
            time,
            x_before: x,
            x_after: x_cur,
            r_before: reserves,
            r_after: r_cur,
            finds,
            price_before,
            price_after,
            discounted_cost: m.k() * explored * (-m.r() * time).exp(),
        },
        x_after: x_cur,
        r_after: r_cur,
    })
}

/// Simulates one path of the optimal strategy from `(x0, r0)`.
///
/// Consumption segments and exploration episodes alternate until the area is
/// exhausted (the path then ends with an infinite Hotelling segment) or the
/// horizon is reached (the path is flagged as not exhausted; nothing beyond
/// the horizon is extrapolated).
pub fn simulate_path(
    surface: &ValueSurface,
    x0: f64,
    r0: f64,
    stream: RngStream,
    horizon: f64,
) -> Result<Path> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::domain(format!("horizon must be > 0, got {horizon}")));
    }
    if x0 > surface.x_max() * (1.0 + 1e-12) {
        return Err(Error::Grid(format!(
            "x0 = {x0} exceeds the solved range {}",
            surface.x_max()
        )));
    }
    if !(r0.is_finite() && r0 >= 0.0) {
        return Err(Error::domain(format!("r0 must be >= 0, got {r0}")));
    }

    let mut rng = stream.rng();
    let mut events = Vec::new();
    let mut segments = Vec::new();
    let mut t = 0.0f64;
    let mut x = x0;
    let mut reserves = r0;
    let mut exhaustion_time = None;
    let mut total_finds = 0u32;
    let mut total_cost = 0.0f64;

    let starts_consuming = x == 0.0 || reserves > surface.frontier().r_star_at(x);
    if starts_consuming {
        let p0 = if x > 0.0 {
            surface.price_at(x, reserves)?
        } else if reserves > 0.0 {
            surface.model().hotelling_price(reserves)?
        } else {
            f64::INFINITY
        };
        events.push(PathEvent {
            kind: EventKind::ConsumptionStart,
            time: 0.0,
            x_before: x,
            x_after: x,
            r_before: reserves,
            r_after: reserves,
            finds: 0,
            price_before: p0,
            price_after: p0,
            discounted_cost: 0.0,
        });
    }

    loop {
        if events.len() > 1_000_000 {
            return Err(Error::Numerical(
                "path exceeded one million events; parameters degenerate".into(),
            ));
        }

        if x > 0.0 && reserves <= surface.frontier().r_star_at(x) {
            let outcome = exploration_episode(surface, t, x, reserves, &mut rng)?;
            total_finds += outcome.event.finds;
            total_cost += outcome.event.discounted_cost;
            if outcome.event.kind == EventKind::Exhaustion {
                exhaustion_time = Some(t);
            }
            events.push(outcome.event);
            x = outcome.x_after;
            reserves = outcome.r_after;
            continue;
        }

        let (c0, duration) = consumption_segment(surface, x, reserves)?;
        segments.push(ConsumptionSegment {
            start_time: t,
            duration,
            x,
            r_start: reserves,
            c0,
        });
        if !duration.is_finite() || t + duration >= horizon {
            break;
        }
        t += duration;
        // land exactly on the frontier
        reserves = surface.frontier().r_star_at(x);
    }

    Ok(Path {
        params: surface.model().params(),
        x0,
        r0,
        stream,
        horizon,
        events,
        segments,
        exhaustion_time,
        total_finds,
        total_discounted_cost: total_cost,
    })
}

/// Evaluates a path's closed-form segment formulas on a time grid.
///
/// At an episode time the post-episode state is reported (right-continuous
/// convention, matching the post-jump reserve notation of the strategy).
pub fn sample_path(surface: &ValueSurface, path: &Path, times: &[f64]) -> Result<Vec<SamplePoint>> {
    let m = surface.model();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if !(0.0..=path.horizon).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                horizon: path.horizon,
            });
        }
        let idx = path
            .segments
            .partition_point(|seg| seg.start_time <= t)
            .saturating_sub(1);
        let seg = &path.segments[idx];
        let tau = t - seg.start_time;
        let reserves = reserves_after(surface, seg.r_start, seg.c0, tau);
        let price = if seg.x == 0.0 {
            if reserves > 0.0 {
                m.hotelling_price(reserves)?
            } else {
                f64::INFINITY
            }
        } else {
            surface.price_at(seg.x, reserves)?
        };
        out.push(SamplePoint {
            time: t,
            price,
            reserves,
            explored_area: path.x0 - seg.x,
            consumption_rate: consumption_rate_after(surface, seg.c0, tau),
            exhausted: path.exhaustion_time.is_some_and(|te| t >= te),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Model, ModelParams};
    use crate::solver::{self, SolverGrid};
    use approx::assert_relative_eq;

    fn set_b() -> Model {
        ModelParams {
            alpha: 0.5,
            r: 0.02,
            a: 0.5,
            lambda: 10.0,
            k: 1.0,
        }
        .validate()
        .unwrap()
    }

    fn surface_b() -> ValueSurface {
        let m = set_b();
        let grid = SolverGrid::regular(1.0, 0.01, 4.5, 0.01).unwrap();
        solver::solve(&m, grid).unwrap()
    }

    #[test]
    fn hotelling_segment_consumes_at_the_known_rate() {
        // x = 0: c0 = U'(R)^{1/(alpha-1)} = r R / (1-alpha) at alpha = 1/2,
        // r = 0.02, and reserves decay to zero without hitting a frontier
        let s = surface_b();
        let (c0, duration) = consumption_segment(&s, 0.0, 2.0).unwrap();
        assert_relative_eq!(c0, 0.04 * 2.0, max_relative = 1e-10);
        assert!(duration.is_infinite());
        let left = reserves_after(&s, 2.0, c0, 1e6);
        assert!(left.abs() < 1e-6);
    }

    #[test]
    fn segment_at_frontier_has_zero_duration() {
        let s = surface_b();
        let x = 0.8;
        let rs = s.frontier().r_star_at(x);
        let (_, duration) = consumption_segment(&s, x, rs).unwrap();
        assert!(duration.abs() < 1e-6, "duration {duration}");
    }

    #[test]
    fn segment_below_frontier_is_rejected() {
        let s = surface_b();
        let x = 0.8;
        let rs = s.frontier().r_star_at(x);
        assert!(matches!(
            consumption_segment(&s, x, rs * 0.5),
            Err(Error::Region(_))
        ));
    }

    #[test]
    fn segment_prices_grow_at_the_interest_rate() {
        let s = surface_b();
        let x = 1.0;
        let r_start = s.frontier().r_star_at(x) + 1.0;
        let (c0, duration) = consumption_segment(&s, x, r_start).unwrap();
        assert!(duration > 0.0 && duration.is_finite());
        let p0 = s.price_at(x, r_start).unwrap();
        for i in 1..=100 {
            let t = duration * i as f64 / 100.0;
            let p = s
                .price_at(x, reserves_after(&s, r_start, c0, t))
                .unwrap();
            assert_relative_eq!(p / p0, (s.model().r() * t).exp(), max_relative = 1e-6);
        }
    }

    #[test]
    fn forced_long_spacing_gives_empty_handed_exhaustion() {
        // with lambda shrunk enormously the first spacing exceeds any area:
        // zero finds, exhaustion, upward price jump
        let m = set_b();
        let grid = SolverGrid::regular(0.05, 0.005, 4.5, 0.01).unwrap();
        let s = solver::solve(&m, grid).unwrap();
        let x = 0.049;
        let rs = s.frontier().r_star_at(x);
        // rejection-scan streams for one whose first spacing exceeds x
        let mut chosen = None;
        for id in 0..200 {
            let mut rng = RngStream::new(7, id).rng();
            let draw: f64 = Exp::new(m.lambda()).unwrap().sample(&mut rng);
            if draw >= x {
                chosen = Some(id);
                break;
            }
        }
        let stream = RngStream::new(7, chosen.expect("some stream draws a long spacing"));
        let mut rng = stream.rng();
        let outcome = exploration_episode(&s, 0.0, x, rs, &mut rng).unwrap();
        assert_eq!(outcome.event.kind, EventKind::Exhaustion);
        assert_eq!(outcome.event.finds, 0);
        assert_eq!(outcome.event.x_after, 0.0);
        assert_eq!(outcome.event.r_after, outcome.event.r_before);
        assert!(outcome.event.price_after > outcome.event.price_before);
    }

    #[test]
    fn episode_reserve_accounting_is_exact() {
        let s = surface_b();
        let x = 1.0;
        let rs = s.frontier().r_star_at(x);
        for id in 0..20 {
            let mut rng = RngStream::new(42, id).rng();
            let outcome = exploration_episode(&s, 0.0, x, rs, &mut rng).unwrap();
            let ev = outcome.event;
            assert_eq!(
                ev.r_after,
                ev.r_before + s.model().a() * ev.finds as f64,
                "stream {id}"
            );
            assert!(ev.x_after <= ev.x_before && ev.x_after >= 0.0);
        }
    }

    #[test]
    fn pure_hotelling_path_has_no_events_but_start() {
        let s = surface_b();
        let path = simulate_path(&s, 0.0, 3.0, RngStream::new(1, 0), 50.0).unwrap();
        assert_eq!(path.events.len(), 1);
        assert_eq!(path.events[0].kind, EventKind::ConsumptionStart);
        assert_eq!(path.segments.len(), 1);
        assert!(path.segments[0].duration.is_infinite());
        assert_eq!(path.total_discounted_cost, 0.0);
        assert!(path.exhaustion_time.is_none());
    }

    #[test]
    fn short_horizon_high_reserves_never_explores() {
        let s = surface_b();
        let path = simulate_path(&s, 1.0, 4.4, RngStream::new(1, 0), 5.0).unwrap();
        assert_eq!(path.segments.len(), 1);
        assert!(path
            .events
            .iter()
            .all(|e| e.kind == EventKind::ConsumptionStart));
    }

    #[test]
    fn paths_replay_identically_and_streams_differ() {
        let s = surface_b();
        let p1 = simulate_path(&s, 1.0, 3.5, RngStream::new(9, 3), 200.0).unwrap();
        let p2 = simulate_path(&s, 1.0, 3.5, RngStream::new(9, 3), 200.0).unwrap();
        assert_eq!(format!("{p1:?}"), format!("{p2:?}"));
        let p3 = simulate_path(&s, 1.0, 3.5, RngStream::new(9, 4), 200.0).unwrap();
        assert_ne!(format!("{p1:?}"), format!("{p3:?}"));
    }

    #[test]
    fn budget_identity_reconstructs_reserves() {
        let s = surface_b();
        let m = s.model();
        let path = simulate_path(&s, 1.0, 3.5, RngStream::new(5, 11), 300.0).unwrap();
        let times: Vec<f64> = (0..=60).map(|i| i as f64 * 5.0).collect();
        let samples = sample_path(&s, &path, &times).unwrap();
        let beta = (1.0 - m.alpha()) / m.r();
        for pt in &samples {
            // integrate consumption over segments up to pt.time
            let mut consumed = 0.0;
            for seg in &path.segments {
                if seg.start_time >= pt.time {
                    break;
                }
                let until = (pt.time - seg.start_time).min(seg.duration);
                consumed += beta * seg.c0 * (-(-until / beta).exp_m1());
            }
            let finds_by_now: u32 = path
                .events
                .iter()
                .filter(|e| e.time <= pt.time)
                .map(|e| e.finds)
                .sum();
            let reconstructed = path.r0 - consumed + m.a() * finds_by_now as f64;
            assert!(
                (pt.reserves - reconstructed).abs() < 1e-8,
                "t={}: {} vs {}",
                pt.time,
                pt.reserves,
                reconstructed
            );
            assert!(pt.reserves >= 0.0);
        }
    }

    #[test]
    fn events_alternate_and_times_increase_strictly() {
        let s = surface_b();
        for id in 0..30 {
            let path = simulate_path(&s, 1.0, 3.2, RngStream::new(77, id), 400.0).unwrap();
            for w in path.events.windows(2) {
                assert!(w[1].time > w[0].time, "stream {id}: {w:?}");
            }
            // every episode starts at or below the frontier
            for ev in &path.events {
                if ev.kind != EventKind::ConsumptionStart {
                    let rs = s.frontier().r_star_at(ev.x_before);
                    assert!(
                        ev.r_before <= rs * (1.0 + 1e-9) + 1e-12,
                        "episode entered above the frontier: {ev:?}"
                    );
                }
            }
            // exhaustion is final
            if let Some(pos) = path
                .events
                .iter()
                .position(|e| e.kind == EventKind::Exhaustion)
            {
                assert_eq!(pos, path.events.len() - 1);
                assert!(path.exhaustion_time.is_some());
            }
            // calendar time never advances across an episode: each episode
            // time equals the end of the segment that precedes it
            for ev in &path.events {
                if ev.kind != EventKind::ConsumptionStart {
                    if let Some(seg) = path
                        .segments
                        .iter()
                        .rev()
                        .find(|seg| seg.start_time < ev.time)
                    {
                        assert_relative_eq!(
                            seg.start_time + seg.duration,
                            ev.time,
                            epsilon = 1e-9,
                            max_relative = 1e-9
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn post_exhaustion_prices_follow_the_hotelling_rule_exactly() {
        let s = surface_b();
        let mut seen = 0;
        for id in 0..50 {
            let path = simulate_path(&s, 1.0, 3.2, RngStream::new(13, id), 500.0).unwrap();
            let Some(te) = path.exhaustion_time else {
                continue;
            };
            seen += 1;
            let t1 = te + 10.0;
            let t2 = te + 150.0;
            let pts = sample_path(&s, &path, &[t1, t2]).unwrap();
            assert!(pts[0].exhausted && pts[1].exhausted);
            assert_relative_eq!(
                pts[1].price / pts[0].price,
                (s.model().r() * (t2 - t1)).exp(),
                max_relative = 1e-10
            );
        }
        assert!(seen > 10, "only {seen} exhausted paths");
    }

    #[test]
    fn sampling_is_right_continuous_at_episodes() {
        let s = surface_b();
        let path = simulate_path(&s, 1.0, 3.2, RngStream::new(21, 2), 500.0).unwrap();
        let episode = path
            .events
            .iter()
            .find(|e| e.kind != EventKind::ConsumptionStart)
            .expect("path has an episode");
        let at = sample_path(&s, &path, &[episode.time]).unwrap()[0];
        assert_relative_eq!(at.price, episode.price_after, max_relative = 1e-9);
        assert_relative_eq!(at.reserves, episode.r_after, max_relative = 1e-9);
        // just below the episode time the price matches the pre-episode side
        let just_before = episode.time - 1e-7;
        let before = sample_path(&s, &path, &[just_before]).unwrap()[0];
        assert_relative_eq!(before.price, episode.price_before, max_relative = 1e-4);
    }

    #[test]
    fn sample_rejects_out_of_range_times() {
        let s = surface_b();
        let path = simulate_path(&s, 1.0, 3.5, RngStream::new(1, 0), 10.0).unwrap();
        assert!(matches!(
            sample_path(&s, &path, &[11.0]),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(matches!(
            sample_path(&s, &path, &[-1.0]),
            Err(Error::TimeOutOfRange { .. })
        ));
    }

    #[test]
    fn sawtooth_sample_path_set() {
        // a = 1, lambda = 5, k = 5: sawtooth prices with a final upward jump
        let m = ModelParams {
            alpha: 0.5,
            r: 0.02,
            a: 1.0,
            lambda: 5.0,
            k: 5.0,
        }
        .validate()
        .unwrap();
        let grid = SolverGrid::default_for(&m, 1.0).unwrap();
        let s = solver::solve(&m, grid).unwrap();
        let mut saw_exhaustion_jump = false;
        for id in 0..40 {
            let path = simulate_path(&s, 1.0, 2.0, RngStream::new(3, id), 600.0).unwrap();
            if let Some(ev) = path
                .events
                .iter()
                .find(|e| e.kind == EventKind::Exhaustion)
            {
                assert!(ev.price_after > ev.price_before);
                saw_exhaustion_jump = true;
            }
        }
        assert!(saw_exhaustion_jump);
    }
}
