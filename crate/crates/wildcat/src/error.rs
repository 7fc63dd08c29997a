//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants mirror the failure modes of the model layer (domain and
/// admissibility violations), the solver (grid coverage, frontier
/// localization) and the simulation/statistics layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Model parameters violate the admissibility condition `U(a) >= k/lambda`:
    /// exploration would never be optimal even at zero reserves.
    #[error("admissibility error: U(a) = {utility_of_find:.6e} < k/lambda = {cost_per_find:.6e}")]
    Admissibility {
        utility_of_find: f64,
        cost_per_find: f64,
    },

    /// A query lies outside the solved grid range.
    #[error("grid error: {0}")]
    Grid(String),

    /// The frontier indicator never crosses its critical value inside the
    /// reserve grid; the grid is too short in the reserve direction.
    #[error("frontier not bracketed at x = {x}: extend the reserve grid above {r_top}")]
    FrontierNotBracketed { x: f64, r_top: f64 },

    /// The computed critical frontier increased with unexplored area beyond
    /// tolerance, which signals a grid too coarse for the parameters.
    #[error("non-monotone frontier at x = {x}: R*(x) = {r_star} exceeds previous {prev} + tol")]
    NonMonotoneFrontier { x: f64, r_star: f64, prev: f64 },

    /// A scalar root could not be bracketed.
    #[error("no root: {0}")]
    NoRoot(String),

    /// A strategy operation was invoked on the wrong side of the frontier.
    #[error("region error: {0}")]
    Region(String),

    /// A sampling time lies outside the simulated horizon.
    #[error("time out of range: t = {t}, horizon = {horizon}")]
    TimeOutOfRange { t: f64, horizon: f64 },

    /// Not enough data to run a statistical check.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Configuration file could not be parsed or validated.
    #[error("config error: {0}")]
    Parse(String),

    /// An internal iteration failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
