//! Exact integration of piecewise-linear data against the exponential
//! discovery kernel `lambda * exp(-lambda t)`.
//!
//! Generic quadrature rules lose accuracy here because the kernel decays on
//! the scale `1/lambda`, which for high discovery intensities is comparable
//! to a single grid step. Integrating the linear interpolant segment by
//! segment in closed form keeps the only error the interpolation error of
//! the integrand itself.

/// Integral of a linear function against `lambda e^{-lambda t} dt` over the
/// segment `[t_lo, t_lo + h]`.
///
/// `v_at_lo` is the integrand value at `t = t_lo` and `v_at_hi` at
/// `t = t_lo + h`; the integrand is linear in `t` between them.
#[inline]
pub(crate) fn exp_kernel_segment(lambda: f64, t_lo: f64, h: f64, v_at_lo: f64, v_at_hi: f64) -> f64 {
    debug_assert!(t_lo >= 0.0 && h > 0.0);
    let lh = lambda * h;
    let mass = -(-lh).exp_m1(); // 1 - e^{-lambda h}, stable for small lh
    let ramp = mass / lh - (1.0 - mass); // integral weight of the (t - t_lo)/h ramp
    (-lambda * t_lo).exp() * (v_at_lo * mass + (v_at_hi - v_at_lo) * ramp)
}
