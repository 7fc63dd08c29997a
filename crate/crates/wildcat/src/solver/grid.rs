//! Discretization of the (unexplored area, reserves) domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Model;

/// Rectangular solver grid. Node sequences start at 0 and are strictly
/// increasing; spacing may be irregular, `x_step`/`r_step` record the nominal
/// spacings used for finite differences and tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverGrid {
    x_nodes: Vec<f64>,
    r_nodes: Vec<f64>,
    x_step: f64,
    r_step: f64,
}

impl SolverGrid {
    pub fn new(x_nodes: Vec<f64>, r_nodes: Vec<f64>) -> Result<Self> {
        if x_nodes.is_empty() || x_nodes[0] != 0.0 {
            return Err(Error::Grid("x nodes must start at 0".into()));
        }
        if r_nodes.len() < 3 || r_nodes[0] != 0.0 {
            return Err(Error::Grid(
                "reserve nodes must start at 0 and contain at least 3 nodes".into(),
            ));
        }
        for w in x_nodes.windows(2) {
            if !w[1].is_finite() || w[1] <= w[0] {
                return Err(Error::Grid("x nodes must be strictly increasing".into()));
            }
        }
        for w in r_nodes.windows(2) {
            if !w[1].is_finite() || w[1] <= w[0] {
                return Err(Error::Grid(
                    "reserve nodes must be strictly increasing".into(),
                ));
            }
        }
        let x_step = if x_nodes.len() > 1 {
            x_nodes[1] - x_nodes[0]
        } else {
            0.0
        };
        let r_step = r_nodes[1] - r_nodes[0];
        Ok(SolverGrid {
            x_nodes,
            r_nodes,
            x_step,
            r_step,
        })
    }

    /// Uniform grid with the given extents and steps; the final node is
    /// pinned to the exact extent.
    pub fn regular(x_max: f64, x_step: f64, r_max: f64, r_step: f64) -> Result<Self> {
        if !(x_max >= 0.0 && x_step > 0.0 && r_max > 0.0 && r_step > 0.0) {
            return Err(Error::Grid(format!(
                "invalid grid spec: x_max={x_max} x_step={x_step} r_max={r_max} r_step={r_step}"
            )));
        }
        Ok(SolverGrid {
            x_nodes: uniform_nodes(x_max, x_step),
            r_nodes: uniform_nodes(r_max, r_step),
            x_step,
            r_step,
        })
    }

    /// Default steps for a model: `x_step = min(0.01, 0.2/lambda)` resolves
    /// the discovery kernel scale, `r_step = min(0.01, a/50)` resolves the
    /// jump size.
    pub fn default_steps(model: &Model) -> (f64, f64) {
        ((0.2 / model.lambda()).min(0.01), (model.a() / 50.0).min(0.01))
    }

    /// Default reserve extent: anchored at the frontier anchor `R*(0)` (the
    /// frontier is decreasing in x, so it covers every frontier value) with
    /// headroom of one jump plus 25%.
    pub fn default_r_max(model: &Model, r_step: f64) -> Result<f64> {
        let r0 = crate::solver::frontier_at_zero(model)?;
        Ok(1.25 * r0 + model.a() + r_step)
    }

    /// Default grid for a model over `[0, x_max]`.
    pub fn default_for(model: &Model, x_max: f64) -> Result<Self> {
        let (x_step, r_step) = Self::default_steps(model);
        Self::regular(x_max, x_step, Self::default_r_max(model, r_step)?, r_step)
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.r_nodes
    }

    pub fn x_step(&self) -> f64 {
        self.x_step
    }

    pub fn r_step(&self) -> f64 {
        self.r_step
    }

    pub fn x_max(&self) -> f64 {
        *self.x_nodes.last().unwrap()
    }

    pub fn r_max(&self) -> f64 {
        *self.r_nodes.last().unwrap()
    }

    /// Index of the last x node <= x (x assumed within range).
    pub(crate) fn x_bracket(&self, x: f64) -> usize {
        self.x_nodes.partition_point(|&n| n <= x).saturating_sub(1)
    }

    /// Index of the last reserve node <= r (r assumed within range).
    pub(crate) fn r_bracket(&self, r: f64) -> usize {
        self.r_nodes.partition_point(|&n| n <= r).saturating_sub(1)
    }
}

fn uniform_nodes(max: f64, step: f64) -> Vec<f64> {
    let mut nodes = Vec::with_capacity((max / step) as usize + 2);
    let mut i = 0u64;
    loop {
        let v = i as f64 * step;
        if v >= max - 1e-12 * step.max(max) {
            break;
        }
        nodes.push(v);
        i += 1;
    }
    nodes.push(max);
    nodes
}
