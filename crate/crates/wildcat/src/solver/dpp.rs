//! Dynamic-programming fixed point: an independent oracle for the marching
//! solver.
//!
//! The value function satisfies
//!
//! ```text
//! V(x, R) = sup_{0 <= Q <= R, theta >= 0} { Utilde(theta, Q)
//!                                           + e^{-r theta} MV(x, R - Q) }
//! ```
//!
//! where `Utilde(theta, Q) = (Q^alpha / alpha) ((1-alpha)/r)^(1-alpha)
//! (1 - e^{-r theta/(1-alpha)})^(1-alpha)` is the value of consuming the
//! budget `Q` over a horizon `theta`. Iterating the right-hand side from the
//! Hotelling value `U` produces the nondecreasing sequence of value
//! functions with at most `n` exploration episodes, which converges to `V`.
//!
//! This module iterates the relation on a small grid by brute force: the
//! supremum is taken over `Q` on a refinement grid and, for each `Q`, over
//! the horizon by golden-section search on the substituted variable
//! `s = 1 - e^{-r theta/(1-alpha)} in [0, 1]` (the objective is concave in
//! `s`). Nothing is shared with the marching scheme except the kernel
//! quadrature, so agreement between the two is a genuine cross-check.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::solver::grid::SolverGrid;
use crate::solver::kernel::exp_kernel_segment;

/// Result of the fixed-point iteration.
#[derive(Debug, Clone)]
pub struct DppSolution {
    grid: SolverGrid,
    values: Vec<f64>, // row-major [ix * nr + ir]
    /// Relative sup-norm change of the final round.
    pub last_change: f64,
    /// False if the final round still moved by more than 1e-3 relative
    /// (convergence warning: more rounds are needed at these parameters).
    pub converged: bool,
}

impl DppSolution {
    pub fn grid(&self) -> &SolverGrid {
        &self.grid
    }

    pub fn value_node(&self, ix: usize, ir: usize) -> f64 {
        self.values[ix * self.grid.r_nodes().len() + ir]
    }
}

/// Consumption value of spending budget `q` over horizon `theta` expressed
/// through `s = 1 - e^{-r theta/(1-alpha)}`; `s = 1` is the infinite-horizon
/// (pure Hotelling) limit where it equals `U(q)`.
fn horizon_utility(model: &Model, q: f64, s: f64) -> f64 {
    let alpha = model.alpha();
    let pref = ((1.0 - alpha) / model.r()).powf(1.0 - alpha) / alpha;
    pref * q.powf(alpha) * s.powf(1.0 - alpha)
}

/// Iterates the dynamic-programming relation `n_rounds` times starting from
/// the Hotelling value. Intended for coarse oracle grids; cost grows as
/// `nx * nr^2` per round.
pub fn dpp_fixed_point(model: &Model, grid: SolverGrid, n_rounds: usize) -> Result<DppSolution> {
    if model.k() == 0.0 {
        return Err(Error::domain(
            "k = 0: the frontier is at infinity; use full_information_value",
        ));
    }
    if n_rounds == 0 {
        return Err(Error::domain("n_rounds must be >= 1"));
    }
    let x_nodes = grid.x_nodes().to_vec();
    let r_nodes = grid.r_nodes().to_vec();
    let (nx, nr) = (x_nodes.len(), r_nodes.len());
    let alpha = model.alpha();
    let c_star = model.c_star();
    let lambda = model.lambda();
    let a = model.a();

    let hotelling: Vec<f64> = r_nodes
        .iter()
        .map(|&r| model.hotelling_value_unchecked(r))
        .collect();
    let mut current: Vec<f64> = (0..nx).flat_map(|_| hotelling.iter().copied()).collect();
    let mut last_change = f64::INFINITY;

    for _ in 0..n_rounds {
        // value of the previous iterate at (row ix, reserves r); above the
        // grid top the consumption closed form anchored at the top node is
        // used (exact for every iterate of this recursion)
        let prev = &current;
        let eval_prev = |ix: usize, r: f64| -> f64 {
            let row = &prev[ix * nr..(ix + 1) * nr];
            let top = r_nodes[nr - 1];
            if r >= top {
                return (row[nr - 1].powf(1.0 / alpha) + c_star * (r - top)).powf(alpha);
            }
            let lo = (r_nodes.partition_point(|&n| n <= r) - 1).min(nr - 2);
            let w = (r - r_nodes[lo]) / (r_nodes[lo + 1] - r_nodes[lo]);
            row[lo] + w * (row[lo + 1] - row[lo])
        };

        // exploration operator of the previous iterate on the whole grid
        let mut operator = vec![0.0; nx * nr];
        operator[..nr].copy_from_slice(&hotelling);
        let mut running = vec![0.0; nr];
        for ix in 1..nx {
            let x = x_nodes[ix];
            let h = x - x_nodes[ix - 1];
            let decay_h = (-lambda * h).exp();
            let decay_x = (-lambda * x).exp();
            let cost = model.k() / lambda * (1.0 - decay_x);
            for ir in 0..nr {
                let shifted = r_nodes[ir] + a;
                running[ir] = decay_h * running[ir]
                    + exp_kernel_segment(
                        lambda,
                        0.0,
                        h,
                        eval_prev(ix, shifted),
                        eval_prev(ix - 1, shifted),
                    );
                operator[ix * nr + ir] = running[ir] + hotelling[ir] * decay_x - cost;
            }
        }

        // pointwise supremum over the consumption budget and horizon
        let next: Vec<f64> = (0..nx * nr)
            .into_par_iter()
            .map(|node| {
                let (ix, ir) = (node / nr, node % nr);
                let reserves = r_nodes[ir];
                let op_row = &operator[ix * nr..(ix + 1) * nr];
                let interp_op = |rho: f64| -> f64 {
                    let lo = (r_nodes.partition_point(|&n| n <= rho) - 1).min(nr - 2);
                    let w = (rho - r_nodes[lo]) / (r_nodes[lo + 1] - r_nodes[lo]);
                    op_row[lo] + w * (op_row[lo + 1] - op_row[lo])
                };

                // coarse pass: leftover reserves on grid nodes
                let mut best = f64::NEG_INFINITY;
                let mut best_iq = 0usize;
                for iq in 0..=ir {
                    let value =
                        sup_over_horizon(model, reserves - r_nodes[iq], op_row[iq]);
                    if value > best {
                        best = value;
                        best_iq = iq;
                    }
                }
                // refinement pass around the best node
                let lo = if best_iq == 0 { 0.0 } else { r_nodes[best_iq - 1] };
                let hi = r_nodes[(best_iq + 1).min(ir)];
                if hi > lo {
                    const REFINE: usize = 24;
                    for i in 0..=REFINE {
                        let rho = lo + (hi - lo) * i as f64 / REFINE as f64;
                        let value = sup_over_horizon(model, reserves - rho, interp_op(rho));
                        if value > best {
                            best = value;
                        }
                    }
                }
                best
            })
            .collect();

        last_change = current
            .iter()
            .zip(&next)
            .map(|(&old, &new)| (new - old).abs() / (1.0 + new.abs()))
            .fold(0.0, f64::max);
        current = next;
    }

    Ok(DppSolution {
        grid,
        values: current,
        last_change,
        converged: last_change <= 1e-3,
    })
}

/// `sup_{s in [0,1]} { Utilde(q, s) + (1-s)^(1-alpha) w }` by golden-section
/// search; endpoints are checked explicitly so the Hotelling branch
/// (`s = 1`) and the explore-now branch (`s = 0`) are never lost.
fn sup_over_horizon(model: &Model, q: f64, w: f64) -> f64 {
    debug_assert!(q >= -1e-12);
    let q = q.max(0.0);
    let alpha = model.alpha();
    let f = |s: f64| horizon_utility(model, q, s) + (1.0 - s).powf(1.0 - alpha) * w;
    if q == 0.0 {
        // utility term vanishes; (1-s)^(1-alpha) w is maximal at s = 0
        return w.max(f(1.0));
    }
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut s1 = hi - inv_phi * (hi - lo);
    let mut s2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(s1), f(s2));
    for _ in 0..70 {
        if f1 < f2 {
            lo = s1;
            s1 = s2;
            f1 = f2;
            s2 = lo + inv_phi * (hi - lo);
            f2 = f(s2);
        } else {
            hi = s2;
            s2 = s1;
            f2 = f1;
            s1 = hi - inv_phi * (hi - lo);
            f1 = f(s1);
        }
    }
    f(0.5 * (lo + hi)).max(f(0.0)).max(f(1.0))
}
