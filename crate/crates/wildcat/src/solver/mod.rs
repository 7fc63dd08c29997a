//! Free-boundary solver for the exploration-consumption value surface.
//!
//! The value function solves the quasi-variational system
//!
//! ```text
//! max { u*(V_R) - r V,  MV - V } = 0,      V(0, R) = U(R),
//! ```
//!
//! where `M` is the exploration operator
//!
//! ```text
//! MV(x, R) = int_0^x V(x-s, R+a) lambda e^{-lambda s} ds
//!            + U(R) e^{-lambda x} - k (1 - e^{-lambda x}) / lambda,
//! ```
//!
//! the value of exploring at once until the next find or exhaustion. The
//! domain splits into an exploration region `{R <= R*(x)}` where `V = MV`
//! and a consumption region above the critical frontier `R*(x)`, located by
//! the indicator `g(x, R) = d/dR [MV^(1/alpha)]` crossing the constant
//! `c = d/dR [U^(1/alpha)]`.

mod bounds;
mod dpp;
mod grid;
mod kernel;
mod residuals;
mod solve;
mod surface;

pub use bounds::{consumption_upper_bound, exploration_lower_bound, frontier_expansion_residual};
pub use dpp::{dpp_fixed_point, DppSolution};
pub use grid::SolverGrid;
pub use residuals::{hjb_residuals, ResidualReport};
pub use solve::{frontier_at_zero, solve};
pub use surface::{consumption_extension, Frontier, Region, ValueSurface};
