//! Free-boundary solver.
//!
//! The exploration operator `M` at area `x` only reads the surface at
//! strictly smaller areas, so a single sweep in increasing x solves the
//! quasi-variational system exactly up to quadrature error:
//!
//! 1. boundary row `V(0, .) = U`;
//! 2. at each new x node, evaluate `MV(x, .)` (one new kernel segment per
//!    step thanks to the exponential kernel's product structure, so the
//!    sweep is O(nx * nr) rather than O(nx^2 * nr));
//! 3. locate the critical reserve `R*(x) = inf { R : g(x, R) < c }` by grid
//!    scan plus bisection;
//! 4. set `V = MV` below the frontier and the anchored consumption closed
//!    form above it.
//!
//! The newest kernel segment involves the value at the current x node
//! itself, whose kernel weight is O(lambda h / 2); the row is therefore
//! solved implicitly by a small fixed-point iteration per step, started from
//! a linear predictor.

use crate::error::{Error, Result};
use crate::model::Model;
use crate::solver::grid::SolverGrid;
use crate::solver::kernel::exp_kernel_segment;
use crate::solver::surface::{Frontier, ValueSurface};

/// Frontier anchor `R*(0)`: the unique positive solution of
///
/// ```text
/// alpha (1 + a/R)^(alpha-1) + (1-alpha)(1 + a/R)^alpha
///     - (1-alpha) (a/R)^alpha epsilon = 1.
/// ```
///
/// In `y = a/R` the left side minus one decreases from zero to a negative
/// minimum at `y* = q/(1-q)`, `q = epsilon^(1/(2-alpha))`, then increases to
/// `+inf`, so `[y*, inf)` brackets the root. Bisection to relative
/// tolerance 1e-10.
pub fn frontier_at_zero(model: &Model) -> Result<f64> {
    let alpha = model.alpha();
    let eps = model.epsilon();
    if eps <= 0.0 {
        return Err(Error::domain(
            "k = 0: the frontier is at infinity; use full_information_value",
        ));
    }
    if eps >= 1.0 {
        return Err(Error::domain(format!(
            "epsilon = {eps} >= 1: frontier anchor degenerates to zero reserves"
        )));
    }
    let f = |y: f64| {
        alpha * (1.0 + y).powf(alpha - 1.0) + (1.0 - alpha) * (1.0 + y).powf(alpha)
            - (1.0 - alpha) * y.powf(alpha) * eps
            - 1.0
    };
    let q = eps.powf(1.0 / (2.0 - alpha));
    let y_min = q / (1.0 - q);
    if f(y_min) >= 0.0 || f(y_min).is_nan() {
        return Err(Error::NoRoot(format!(
            "frontier anchor criterion not negative at its minimum (epsilon = {eps})"
        )));
    }
    let mut lo = y_min;
    let mut hi = (2.0 * y_min).max(1.0);
    while f(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e14 {
            return Err(Error::NoRoot(
                "frontier anchor bracket not found below R = 1e-14 a".into(),
            ));
        }
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(model.a() / (0.5 * (lo + hi)))
}

/// Row evaluation shared by the solver: stored nodes below the row frontier,
/// anchored closed form at and above it.
#[inline]
fn eval_row(
    r_nodes: &[f64],
    values: &[f64],
    r_star: f64,
    psi_star: f64,
    alpha: f64,
    c_star: f64,
    r: f64,
) -> f64 {
    if r >= r_star {
        return (psi_star + c_star * (r - r_star)).powf(alpha);
    }
    let nr = r_nodes.len();
    let lo = (r_nodes.partition_point(|&n| n <= r) - 1).min(nr - 2);
    let w = (r - r_nodes[lo]) / (r_nodes[lo + 1] - r_nodes[lo]);
    values[lo] + w * (values[lo + 1] - values[lo])
}

/// Solves the value surface on the given grid by marching in x.
///
/// Requires `k > 0` (with costless exploration the frontier is at infinity
/// and the closed-form full-information value applies) and a reserve grid
/// extending beyond the frontier anchor `R*(0)`.
pub fn solve(model: &Model, grid: SolverGrid) -> Result<ValueSurface> {
    if model.k() == 0.0 {
        return Err(Error::domain(
            "k = 0: the frontier is at infinity; use full_information_value",
        ));
    }
    let r0 = frontier_at_zero(model)?;
    let x_nodes = grid.x_nodes().to_vec();
    let r_nodes = grid.r_nodes().to_vec();
    let (nx, nr) = (x_nodes.len(), r_nodes.len());
    if grid.r_max() <= r0 {
        return Err(Error::Grid(format!(
            "reserve grid top {} does not reach the frontier anchor R*(0) = {r0}",
            grid.r_max()
        )));
    }

    let alpha = model.alpha();
    let c_star = model.c_star();
    let lambda = model.lambda();
    let a = model.a();
    let bisect_tol = grid.r_step() / 100.0;
    let mono_tol = grid.r_step() / 10.0;

    let mut v = vec![0.0; nx * nr];
    let mut mv = vec![0.0; nx * nr];
    let mut r_star = vec![0.0; nx];
    let mut v_star = vec![0.0; nx];
    let mut psi_star = vec![0.0; nx];

    let u_row: Vec<f64> = r_nodes
        .iter()
        .map(|&r| model.hotelling_value_unchecked(r))
        .collect();
    v[..nr].copy_from_slice(&u_row);
    mv[..nr].copy_from_slice(&u_row);
    r_star[0] = r0;
    v_star[0] = model.hotelling_value_unchecked(r0);
    psi_star[0] = v_star[0].powf(1.0 / alpha);

    // running[ir] = int_0^{x_j} V(w, r_ir + a) lambda e^{-lambda (x_j - w)} dw
    let mut running = vec![0.0; nr];

    for j in 1..nx {
        let x = x_nodes[j];
        let h = x - x_nodes[j - 1];
        let decay_h = (-lambda * h).exp();
        let decay_x = (-lambda * x).exp();
        let cost = model.k() / lambda * (1.0 - decay_x);

        let (done_v, rest_v) = v.split_at_mut(j * nr);
        let prev = &done_v[(j - 1) * nr..];
        let prev_eval = |r: f64| {
            eval_row(
                &r_nodes,
                prev,
                r_star[j - 1],
                psi_star[j - 1],
                alpha,
                c_star,
                r,
            )
        };
        let prev_shift: Vec<f64> = r_nodes.iter().map(|&r| prev_eval(r + a)).collect();
        let base: Vec<f64> = (0..nr)
            .map(|ir| decay_h * running[ir] + u_row[ir] * decay_x - cost)
            .collect();

        // predictor: linear extrapolation in x, clipped from below by the
        // previous row (V is nondecreasing in x)
        let mut work: Vec<f64> = if j >= 2 {
            let older = &done_v[(j - 2) * nr..(j - 1) * nr];
            (0..nr)
                .map(|ir| (2.0 * prev[ir] - older[ir]).max(prev[ir]))
                .collect()
        } else {
            prev.to_vec()
        };
        let mut work_rs = r_star[j - 1];
        let mut work_psi = psi_star[j - 1];

        // off-grid MV against completed rows plus the working row
        let mv_at = |r: f64, wk: &[f64], wk_rs: f64, wk_psi: f64| -> f64 {
            let shifted = r + a;
            let mut total = model.hotelling_value_unchecked(r) * decay_x - cost;
            let mut v_low = eval_row(
                &r_nodes,
                &done_v[..nr],
                r_star[0],
                psi_star[0],
                alpha,
                c_star,
                shifted,
            );
            for i in 0..j - 1 {
                let v_high = eval_row(
                    &r_nodes,
                    &done_v[(i + 1) * nr..(i + 2) * nr],
                    r_star[i + 1],
                    psi_star[i + 1],
                    alpha,
                    c_star,
                    shifted,
                );
                total += exp_kernel_segment(
                    lambda,
                    x - x_nodes[i + 1],
                    x_nodes[i + 1] - x_nodes[i],
                    v_high,
                    v_low,
                );
                v_low = v_high;
            }
            let v_end = eval_row(&r_nodes, wk, wk_rs, wk_psi, alpha, c_star, shifted);
            total + exp_kernel_segment(lambda, 0.0, h, v_end, v_low)
        };

        let mut mv_row = vec![0.0; nr];
        let mut frontier_here;
        let mut iter = 0usize;
        loop {
            iter += 1;
            for ir in 0..nr {
                let v_end = eval_row(
                    &r_nodes,
                    &work,
                    work_rs,
                    work_psi,
                    alpha,
                    c_star,
                    r_nodes[ir] + a,
                );
                mv_row[ir] = base[ir] + exp_kernel_segment(lambda, 0.0, h, v_end, prev_shift[ir]);
            }

            frontier_here = locate_frontier(
                &r_nodes,
                &mv_row,
                alpha,
                c_star,
                bisect_tol,
                x,
                |r| mv_at(r, &work, work_rs, work_psi),
            )?;
            let (rs, vs) = frontier_here;
            let psi_s = vs.powf(1.0 / alpha);

            let mut delta = 0.0f64;
            for ir in 0..nr {
                let nv = if r_nodes[ir] <= rs {
                    mv_row[ir]
                } else {
                    (psi_s + c_star * (r_nodes[ir] - rs)).powf(alpha)
                };
                let d = (nv - work[ir]).abs() / (1.0 + nv.abs());
                if d > delta {
                    delta = d;
                }
                work[ir] = nv;
            }
            work_rs = rs;
            work_psi = psi_s;

            if delta < 1e-11 && iter >= 2 {
                break;
            }
            if iter >= 60 {
                if delta < 1e-8 {
                    break;
                }
                return Err(Error::Numerical(format!(
                    "implicit step at x = {x} did not converge (delta = {delta:.3e})"
                )));
            }
        }

        let (rs, vs) = frontier_here;
        if rs > r_star[j - 1] + mono_tol {
            return Err(Error::NonMonotoneFrontier {
                x,
                r_star: rs,
                prev: r_star[j - 1],
            });
        }

        // final operator values consistent with the converged row
        for ir in 0..nr {
            let v_end = eval_row(
                &r_nodes,
                &work,
                work_rs,
                work_psi,
                alpha,
                c_star,
                r_nodes[ir] + a,
            );
            mv_row[ir] = base[ir] + exp_kernel_segment(lambda, 0.0, h, v_end, prev_shift[ir]);
            running[ir] = mv_row[ir] - u_row[ir] * decay_x + cost;
        }
        rest_v[..nr].copy_from_slice(&work);
        mv[j * nr..(j + 1) * nr].copy_from_slice(&mv_row);
        r_star[j] = rs;
        v_star[j] = vs;
        psi_star[j] = vs.powf(1.0 / alpha);
    }

    let frontier = Frontier::new(x_nodes, r_star, v_star, model, r0);
    Ok(ValueSurface::new(*model, grid, v, mv, frontier))
}

/// Scan the reserve grid for the first node where the indicator
/// `g = d/dR (MV^(1/alpha))` falls below `c`, then bisect the bracketing
/// segment to `tol`. Returns the frontier location and `MV` there.
fn locate_frontier(
    r_nodes: &[f64],
    mv_row: &[f64],
    alpha: f64,
    c_star: f64,
    tol: f64,
    x: f64,
    mv_at: impl Fn(f64) -> f64,
) -> Result<(f64, f64)> {
    let nr = r_nodes.len();
    let psi: Vec<f64> = mv_row.iter().map(|&m| m.max(0.0).powf(1.0 / alpha)).collect();
    let g_node = |ir: usize| -> f64 {
        if ir == 0 {
            (psi[1] - psi[0]) / (r_nodes[1] - r_nodes[0])
        } else if ir == nr - 1 {
            (psi[nr - 1] - psi[nr - 2]) / (r_nodes[nr - 1] - r_nodes[nr - 2])
        } else {
            (psi[ir + 1] - psi[ir - 1]) / (r_nodes[ir + 1] - r_nodes[ir - 1])
        }
    };

    let mut first_below = None;
    for ir in 0..nr {
        if g_node(ir) < c_star {
            first_below = Some(ir);
            break;
        }
    }
    let Some(idx) = first_below else {
        return Err(Error::FrontierNotBracketed {
            x,
            r_top: r_nodes[nr - 1],
        });
    };

    let step = r_nodes[1] - r_nodes[0];
    let g_at = |r: f64| -> f64 {
        let psi_of = |r: f64| mv_at(r).max(0.0).powf(1.0 / alpha);
        if r >= step {
            (psi_of(r + step) - psi_of(r - step)) / (2.0 * step)
        } else {
            (psi_of(r + step) - psi_of(r)) / step
        }
    };

    // infimum convention: keep the lower end of the bracket where g >= c
    let mut lo = if idx == 0 { step * 1e-9 } else { r_nodes[idx - 1] };
    let mut hi = r_nodes[idx];
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g_at(mid) < c_star {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let rs = 0.5 * (lo + hi);
    Ok((rs, mv_at(rs)))
}
