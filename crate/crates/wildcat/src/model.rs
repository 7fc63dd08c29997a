//! Model primitives for the exhaustible-resource exploration problem.
//!
//! The economy has two state variables: proven reserves `R` and unexplored
//! area `x`. Deposits of fixed size `a` are scattered in the unexplored area
//! as a Poisson process with intensity `lambda` per unit area; exploring
//! costs `k` per unit area. Consumption of reserves yields CRRA utility
//! `u(c) = c^alpha / alpha` discounted at the interest rate `r`.
//!
//! With no unexplored area left the problem reduces to deterministic
//! cake-eating (Hotelling), whose value has the closed form
//!
//! ```text
//! U(R) = ((1 - alpha)/r)^(1-alpha) * R^alpha / alpha
//! ```
//!
//! and whose shadow price is `U'(R)`. At the opposite extreme, costless
//! exploration (`k = 0`) makes it optimal to explore everything at t = 0,
//! giving the full-information value `E[U(R + a*N_x)]` with `N_x` Poisson.
//! Both closed forms serve as oracles for the free-boundary solver: the true
//! value function is sandwiched between them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five model primitives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Utility curvature, in (0, 1).
    pub alpha: f64,
    /// Interest rate per unit time, > 0.
    pub r: f64,
    /// Deposit size (reserve units per find), > 0.
    pub a: f64,
    /// Discovery intensity per unit area, > 0.
    pub lambda: f64,
    /// Exploration cost per unit area, >= 0.
    pub k: f64,
}

/// Constants derived from [`ModelParams`]; pure functions of the primitives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Dimensionless cost ratio `k / (lambda * U(a))`, in [0, 1] for
    /// admissible parameters.
    pub epsilon: f64,
    /// Slope constant of the frontier test,
    /// `c = (1/alpha) * (alpha r / (1 - alpha))^(1 - 1/alpha)`.
    /// Equals `d/dR [U(R)^(1/alpha)]`, which is constant in `R`.
    pub c_star: f64,
    /// Prefactor of the Hotelling value, `((1-alpha)/r)^(1-alpha) / alpha`,
    /// so that `U(R) = u_prefactor * R^alpha`.
    pub u_prefactor: f64,
}

/// Validated model: parameters plus derived constants.
///
/// All methods are pure and deterministic; the type is `Copy` and safe to
/// share across threads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    params: ModelParams,
    derived: DerivedConstants,
}

impl ModelParams {
    /// Checks domain constraints and the admissibility condition
    /// `U(a) >= k/lambda`, returning the validated model with derived
    /// constants attached.
    ///
    /// `k = 0` is accepted (`epsilon = 0`); the free-boundary solver rejects
    /// it separately because the frontier is then at infinity and the
    /// full-information closed form applies instead.
    pub fn validate(self) -> Result<Model> {
        let ModelParams {
            alpha,
            r,
            a,
            lambda,
            k,
        } = self;
        if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("alpha must be in (0, 1), got {alpha}")));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::domain(format!("r must be > 0, got {r}")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::domain(format!("a must be > 0, got {a}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::domain(format!("lambda must be > 0, got {lambda}")));
        }
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::domain(format!("k must be >= 0, got {k}")));
        }

        let u_prefactor = ((1.0 - alpha) / r).powf(1.0 - alpha) / alpha;
        let utility_of_find = u_prefactor * a.powf(alpha);
        let cost_per_find = k / lambda;
        if utility_of_find < cost_per_find {
            return Err(Error::Admissibility {
                utility_of_find,
                cost_per_find,
            });
        }

        let epsilon = cost_per_find / utility_of_find;
        let c_star = (1.0 / alpha) * (alpha * r / (1.0 - alpha)).powf(1.0 - 1.0 / alpha);

        Ok(Model {
            params: self,
            derived: DerivedConstants {
                epsilon,
                c_star,
                u_prefactor,
            },
        })
    }
}

impl Model {
    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn derived(&self) -> DerivedConstants {
        self.derived
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    pub fn r(&self) -> f64 {
        self.params.r
    }

    pub fn a(&self) -> f64 {
        self.params.a
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    pub fn k(&self) -> f64 {
        self.params.k
    }

    pub fn epsilon(&self) -> f64 {
        self.derived.epsilon
    }

    pub fn c_star(&self) -> f64 {
        self.derived.c_star
    }

    /// Instantaneous utility `u(c) = c^alpha / alpha`, with `u(0) = 0`.
    pub fn utility(&self, c: f64) -> Result<f64> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::domain(format!("consumption must be >= 0, got {c}")));
        }
        Ok(c.powf(self.params.alpha) / self.params.alpha)
    }

    /// Convex conjugate `u*(p) = sup_c {u(c) - c p}
    ///                        = ((1-alpha)/alpha) p^(alpha/(alpha-1))`.
    pub fn conjugate(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::domain(format!("price must be > 0, got {p}")));
        }
        let alpha = self.params.alpha;
        Ok((1.0 - alpha) / alpha * p.powf(alpha / (alpha - 1.0)))
    }

    /// Inverse of the conjugate: `u1(y) = (alpha y / (1-alpha))^(1 - 1/alpha)`.
    pub fn conjugate_inverse(&self, y: f64) -> Result<f64> {
        if !(y.is_finite() && y > 0.0) {
            return Err(Error::domain(format!("value must be > 0, got {y}")));
        }
        let alpha = self.params.alpha;
        Ok((alpha * y / (1.0 - alpha)).powf(1.0 - 1.0 / alpha))
    }

    /// Hotelling value `U(R)`: present value of optimally consuming a known
    /// stock `R` with no exploration.
    pub fn hotelling_value(&self, reserves: f64) -> Result<f64> {
        if !(reserves.is_finite() && reserves >= 0.0) {
            return Err(Error::domain(format!(
                "reserves must be >= 0, got {reserves}"
            )));
        }
        Ok(self.hotelling_value_unchecked(reserves))
    }

    #[inline]
    pub(crate) fn hotelling_value_unchecked(&self, reserves: f64) -> f64 {
        self.derived.u_prefactor * reserves.powf(self.params.alpha)
    }

    /// Hotelling shadow price `U'(R)`; strictly decreasing in `R` and
    /// divergent as `R -> 0`.
    pub fn hotelling_price(&self, reserves: f64) -> Result<f64> {
        if !(reserves.is_finite() && reserves > 0.0) {
            return Err(Error::domain(format!(
                "reserves must be > 0, got {reserves}"
            )));
        }
        Ok(self.hotelling_price_unchecked(reserves))
    }

    #[inline]
    pub(crate) fn hotelling_price_unchecked(&self, reserves: f64) -> f64 {
        let alpha = self.params.alpha;
        self.derived.u_prefactor * alpha * reserves.powf(alpha - 1.0)
    }

    /// Value under costless exploration (`k = 0`): explore everything at
    /// t = 0 and consume the revealed stock, `E[U(R + a N_x)]` with
    /// `N_x ~ Poisson(lambda x)`.
    ///
    /// The Poisson series is truncated once the accumulated probability mass
    /// exceeds `1 - 1e-12` and the marginal term drops below
    /// `truncation_tol`; `U` grows sublinearly, so the tail is dominated by
    /// the Poisson decay.
    pub fn full_information_value(&self, x: f64, reserves: f64, truncation_tol: f64) -> Result<f64> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::domain(format!("area must be >= 0, got {x}")));
        }
        if !(reserves.is_finite() && reserves >= 0.0) {
            return Err(Error::domain(format!(
                "reserves must be >= 0, got {reserves}"
            )));
        }
        let mean = self.params.lambda * x;
        if mean == 0.0 {
            return Ok(self.hotelling_value_unchecked(reserves));
        }

        let mut prob = (-mean).exp(); // P(N = 0)
        let mut cumulative = 0.0;
        let mut total = 0.0;
        let mut n = 0u64;
        loop {
            let term = prob * self.hotelling_value_unchecked(reserves + self.params.a * n as f64);
            total += term;
            cumulative += prob;
            if cumulative > 1.0 - 1e-12 && term < truncation_tol {
                break;
            }
            n += 1;
            prob *= mean / n as f64;
            if n > 100_000 {
                return Err(Error::Numerical(format!(
                    "Poisson series did not truncate (lambda*x = {mean})"
                )));
            }
        }
        Ok(total)
    }
}
