//! A-priori bounds on the exploration frontier.
//!
//! Two curves bracket the critical frontier before any surface is solved:
//!
//! * a lower curve `R_lo(x)`: below it, starting an exploration episode beats
//!   pure Hotelling consumption even under the crudest estimates, so the
//!   point lies in the exploration region;
//! * an upper constant `R_hi`: above it, the one-episode value operator
//!   applied to the best-case (full-information) bound falls below the
//!   Hotelling value for every x in the solved range, so the point lies in
//!   the consumption region.
//!
//! Both reduce to scalar root-finding on strictly decreasing functions of R.

use crate::error::{Error, Result};
use crate::model::Model;

/// Lower frontier curve: the unique root in R of
///
/// ```text
/// (1 - e^{-lambda x}) (U(R + a) - k/lambda)
///     - (e^{alpha lambda x/(1-alpha)} - e^{-lambda x}) U(R) = 0
/// ```
///
/// Points with `R` below the root are provably in the exploration region.
/// At `x = 0` the limiting criterion `(1-alpha)(U(R+a) - k/lambda) = U(R)`
/// is used.
pub fn exploration_lower_bound(model: &Model, x: f64) -> Result<f64> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::domain(format!("area must be >= 0, got {x}")));
    }
    let (alpha, lambda, a, k) = (model.alpha(), model.lambda(), model.a(), model.k());
    let cost = k / lambda;
    let f: Box<dyn Fn(f64) -> f64> = if x == 0.0 {
        Box::new(move |r: f64| {
            (1.0 - alpha) * (model.hotelling_value_unchecked(r + a) - cost)
                - model.hotelling_value_unchecked(r)
        })
    } else {
        let decay = (-lambda * x).exp();
        let growth = (alpha * lambda * x / (1.0 - alpha)).exp();
        Box::new(move |r: f64| {
            (1.0 - decay) * (model.hotelling_value_unchecked(r + a) - cost)
                - (growth - decay) * model.hotelling_value_unchecked(r)
        })
    };
    if f(0.0) <= 0.0 {
        // admissibility is marginal (epsilon = 1) or x so large the bound
        // degenerates; the curve collapses to zero
        return Ok(0.0);
    }
    let mut hi = a;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::NoRoot(
                "exploration lower bound did not bracket".into(),
            ));
        }
    }
    Ok(bisect_decreasing(&f, 0.0, hi, 1e-12))
}

/// Upper consumption bound for a solve over `x in [0, x_max]`: the root in R
/// of the (closed-form) integral criterion
///
/// ```text
/// a U'(R) lambda x_max - (k/lambda)(1 - e^{-lambda x_max}) = 0.
/// ```
///
/// For `R` above the root the criterion is negative for every `x <= x_max`
/// (the left side is convex in x and vanishes at 0), which places
/// `{(x, R): x <= x_max}` in the consumption region. The bound is loose --
/// often far above the true frontier -- and serves as a sanity check, not a
/// grid extent.
pub fn consumption_upper_bound(model: &Model, x_max: f64) -> Result<f64> {
    if !(x_max.is_finite() && x_max > 0.0) {
        return Err(Error::domain(format!("x_max must be > 0, got {x_max}")));
    }
    if model.k() == 0.0 {
        return Ok(f64::INFINITY);
    }
    let (lambda, a, k) = (model.lambda(), model.a(), model.k());
    let rhs = k / lambda * (-(-lambda * x_max).exp_m1());
    let f = move |r: f64| a * model.hotelling_price_unchecked(r) * lambda * x_max - rhs;
    // U' decreases from +inf to 0, so a bracket always exists
    let mut lo = 1e-9 * a;
    while f(lo) < 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::NoRoot("consumption upper bound underflow".into()));
        }
    }
    let mut hi = lo.max(a);
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NoRoot("consumption upper bound overflow".into()));
        }
    }
    Ok(bisect_decreasing(&f, lo, hi, 1e-10))
}

/// Near-exhaustion frontier criterion
///
/// ```text
/// E(R) = (1-alpha)/alpha * [lambda (U(R+a) - U(R)) - k] / U(R)
///        + lambda [U'(R+a) - U'(R)] / U'(R)
/// ```
///
/// The frontier anchor `R*(0)` is its unique positive root, and along the
/// computed frontier `E(R*(x)) -> 0` linearly in x.
pub fn frontier_expansion_residual(model: &Model, r: f64) -> f64 {
    let (alpha, lambda, a, k) = (model.alpha(), model.lambda(), model.a(), model.k());
    let u_r = model.hotelling_value_unchecked(r);
    let u_ra = model.hotelling_value_unchecked(r + a);
    let du_r = model.hotelling_price_unchecked(r);
    let du_ra = model.hotelling_price_unchecked(r + a);
    (1.0 - alpha) / alpha * (lambda * (u_ra - u_r) - k) / u_r + lambda * (du_ra - du_r) / du_r
}

/// Bisection on a strictly decreasing function with f(lo) >= 0 >= f(hi).
fn bisect_decreasing(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    while hi - lo > rel_tol * hi.abs().max(1e-30) {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
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

    #[test]
    fn lower_bound_is_positive_and_below_upper() {
        let m = set_b();
        for x in [0.0, 0.1, 0.5, 1.0] {
            let lo = exploration_lower_bound(&m, x).unwrap();
            assert!(lo > 0.0, "x={x}");
        }
        let hi = consumption_upper_bound(&m, 1.0).unwrap();
        assert!(exploration_lower_bound(&m, 1.0).unwrap() < hi);
    }

    #[test]
    fn upper_bound_matches_closed_form() {
        // U'(R) = k (1 - e^{-lambda x}) / (a lambda^2 x) solved directly
        let m = set_b();
        let x_max = 1.0;
        let target =
            m.k() * (-(-m.lambda() * x_max).exp_m1()) / (m.a() * m.lambda() * m.lambda() * x_max);
        let kappa_alpha = ((1.0 - m.alpha()) / m.r()).powf(1.0 - m.alpha()); // U'(R) = kappa R^{alpha-1}
        let expected = (target / kappa_alpha).powf(1.0 / (m.alpha() - 1.0));
        assert_relative_eq!(
            consumption_upper_bound(&m, x_max).unwrap(),
            expected,
            max_relative = 1e-8
        );
    }

    #[test]
    fn lower_bound_root_changes_sign() {
        let m = set_b();
        let x = 0.3;
        let root = exploration_lower_bound(&m, x).unwrap();
        let decay = (-m.lambda() * x).exp();
        let growth = (m.alpha() * m.lambda() * x / (1.0 - m.alpha())).exp();
        let psi = |r: f64| {
            (1.0 - decay) * (m.hotelling_value(r + m.a()).unwrap() - m.k() / m.lambda())
                - (growth - decay) * m.hotelling_value(r).unwrap()
        };
        assert!(psi(root * 0.99) > 0.0);
        assert!(psi(root * 1.01) < 0.0);
    }
}
