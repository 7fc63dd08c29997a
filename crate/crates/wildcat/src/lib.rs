//! Solver and simulator for optimal exploration of an exhaustible resource
//! with stochastic discoveries (the Arrow-Chang impulse-control model).
//!
//! A single agent consumes a proven reserve stock `R` under CRRA utility and
//! may explore a finite unexplored area `x` at cost `k` per unit, finding
//! deposits of size `a` at Poisson intensity `lambda`. The optimal policy is
//! bang-bang: consume while reserves exceed a critical frontier `R*(x)`,
//! explore in zero time when they hit it. This crate
//!
//! * solves the free-boundary problem for the value surface `V(x, R)`, the
//!   frontier `R*(x)` and shadow prices ([`solver`]);
//! * simulates the optimal strategy path by path ([`strategy`]);
//! * runs seeded ensembles and tests the price-dynamics predictions --
//!   Hotelling rule in expectation, slower conditional growth, upward price
//!   jump at exhaustion ([`ensemble`]);
//! * exposes everything through a configuration-driven CLI with
//!   deterministic CSV/JSON exports ([`config`], [`commands`]).
//!
//! ```
//! use wildcat::model::ModelParams;
//! use wildcat::solver::{self, SolverGrid};
//! use wildcat::strategy::{simulate_path, RngStream};
//!
//! let model = ModelParams { alpha: 0.5, r: 0.02, a: 0.5, lambda: 10.0, k: 1.0 }
//!     .validate()?;
//! let surface = solver::solve(&model, SolverGrid::regular(0.1, 0.01, 4.5, 0.05)?)?;
//!
//! // critical frontier and shadow price at some state
//! let r_star = surface.frontier().r_star_at(0.1);
//! let price = surface.price_at(0.1, r_star + 1.0)?;
//! assert!(price > 0.0);
//!
//! // one seeded path of the optimal strategy
//! let path = simulate_path(&surface, 0.1, r_star + 1.0, RngStream::new(42, 0), 50.0)?;
//! assert!(!path.segments.is_empty());
//! # Ok::<(), wildcat::Error>(())
//! ```

pub mod commands;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod export;
pub mod model;
pub mod solver;
pub mod strategy;

pub use error::{Error, Result};
pub use model::{DerivedConstants, Model, ModelParams};
pub use solver::{SolverGrid, ValueSurface};

/// Version string recorded in every export sidecar.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
