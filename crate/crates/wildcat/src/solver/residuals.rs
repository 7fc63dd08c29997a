//! Residual diagnostics for a solved surface.
//!
//! Each field of [`ResidualReport`] re-derives one branch of the
//! quasi-variational system from the stored surface through an independent
//! route, so none of them is zero by construction:
//!
//! * consumption branch `u*(V_R) = r V` with `V_R` from central finite
//!   differences of the stored nodes (the anchored closed form satisfies the
//!   identity exactly, so differencing the nodes is what actually probes the
//!   discretization);
//! * exploration branch `V = MV` with `MV` re-evaluated by a higher-order
//!   quadrature (cubic Hermite in x, composite Simpson);
//! * the classic differential form
//!   `lambda (V(x, R+a) - V(x, R)) - V_x - k`, equal to zero on the
//!   exploration region and nonpositive on the consumption region, with
//!   `V_x` from central finite differences in x;
//! * the smooth-pasting gap between the one-sided reserve derivative from
//!   below (finite difference of the operator values) and the analytic
//!   critical price from above.
//!
//! Residuals of the stationary branches are relative to the local value
//! scale `r V`; the classic differential form is relative to the magnitude
//! of its own terms. The boundary row `x = 0` is analytic data, not solver
//! output, and is excluded.

use crate::error::Result;
use crate::solver::surface::ValueSurface;

/// Relative residuals of the solved system; all fields nonnegative and
/// finite for a healthy solve.
#[derive(Debug, Clone, Copy)]
pub struct ResidualReport {
    /// Max over consumption-region nodes of `|u*(V_R) - rV| / (rV)`.
    pub max_consumption_residual: f64,
    /// Max over exploration-region nodes of `|V - MV| / V`.
    pub max_exploration_residual: f64,
    /// Max violation of the classic differential form, relative to `rV`.
    pub max_classic_residual: f64,
    /// Max relative jump of `V_R` across the frontier.
    pub smooth_pasting_gap: f64,
}

/// Computes the residual suite on every interior node of the surface.
pub fn hjb_residuals(surface: &ValueSurface) -> Result<ResidualReport> {
    let model = surface.model();
    let grid = surface.grid();
    let x_nodes = grid.x_nodes();
    let r_nodes = grid.r_nodes();
    let (nx, nr) = (x_nodes.len(), r_nodes.len());
    let r_rate = model.r();
    let fr = surface.frontier();

    let mut consumption = 0.0f64;
    let mut exploration = 0.0f64;
    let mut classic = 0.0f64;
    let mut pasting = 0.0f64;

    for ix in 1..nx {
        let x = x_nodes[ix];
        let rs = fr.r_star()[ix];

        for ir in 0..nr {
            let reserves = r_nodes[ir];
            let value = surface.v_node(ix, ir);
            let scale = (r_rate * value).max(1e-300);

            if reserves <= rs {
                let mv_ref = surface.apply_exploration_operator_refined(ix, reserves);
                let res = (value - mv_ref).abs() / value.max(1e-300);
                exploration = exploration.max(res);
            } else if ir >= 1 && ir + 1 < nr && r_nodes[ir - 1] > rs {
                // central stencil fully inside the consumption region
                let v_r = (surface.v_node(ix, ir + 1) - surface.v_node(ix, ir - 1))
                    / (r_nodes[ir + 1] - r_nodes[ir - 1]);
                let res = (model.conjugate(v_r)? - r_rate * value).abs() / scale;
                consumption = consumption.max(res);
            }

            // classic form needs a central x stencil; the residual is
            // relative to the magnitude of the equation's own terms (rV is a
            // poor scale near the R = 0, x = 0 corner)
            if ix + 1 < nx {
                let v_x = (surface.v_node(ix + 1, ir) - surface.v_node(ix - 1, ir))
                    / (x_nodes[ix + 1] - x_nodes[ix - 1]);
                let gain = model.lambda()
                    * (surface.row_value(ix, reserves + model.a()) - value);
                let lhs = gain - v_x - model.k();
                let term_scale = gain.abs() + v_x.abs() + model.k();
                let res = if reserves <= rs {
                    lhs.abs() / term_scale
                } else {
                    lhs.max(0.0) / term_scale
                };
                classic = classic.max(res);
            }
        }

        // smooth pasting: one-sided difference of the operator from below
        // against the analytic critical price from above
        let step = grid.r_step();
        if rs > step {
            let below = (surface.apply_exploration_operator(x, rs)?
                - surface.apply_exploration_operator(x, rs - step)?)
                / step;
            let above = fr.p_star()[ix];
            pasting = pasting.max((below - above).abs() / above.max(1e-300));
        }
    }

    Ok(ResidualReport {
        max_consumption_residual: consumption,
        max_exploration_residual: exploration,
        max_classic_residual: classic,
        smooth_pasting_gap: pasting,
    })
}
