//! C ABI for the exhaustible-resource exploration solver.
//!
//! Bindings follow the usual opaque-handle pattern: constructors return a
//! status code and write a handle through an out-parameter; every handle has
//! a matching `_free` function; all other functions are read-only and safe
//! to call from multiple threads on the same handle. On failure the
//! thread-local message retrieved by [`wildcat_last_error`] describes the
//! problem.
//!
//! The generated header lives at `include/wildcat.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use wildcat::model::{Model, ModelParams};
use wildcat::solver::{self, SolverGrid, ValueSurface};
use wildcat::strategy::{sample_path, simulate_path, RngStream};
use wildcat::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WildcatStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument lies outside its mathematical domain.
    Domain = 2,
    /// Parameters violate the admissibility condition `U(a) >= k/lambda`.
    Admissibility = 3,
    /// Query outside the solved grid range.
    Grid = 4,
    /// The frontier could not be bracketed inside the reserve grid.
    FrontierNotBracketed = 5,
    /// The computed frontier was non-monotone (grid too coarse).
    NonMonotoneFrontier = 6,
    /// A scalar root could not be bracketed.
    NoRoot = 7,
    /// Strategy operation on the wrong side of the frontier.
    Region = 8,
    /// Sampling time outside the simulated horizon.
    TimeOutOfRange = 9,
    /// Not enough data for a statistical check.
    InsufficientData = 10,
    /// Configuration parse failure.
    Parse = 11,
    /// Internal iteration failed to converge.
    Numerical = 12,
    /// I/O failure.
    Io = 13,
    /// A panic was caught at the boundary.
    Panic = 14,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> WildcatStatus {
    match err {
        Error::Domain(_) => WildcatStatus::Domain,
        Error::Admissibility { .. } => WildcatStatus::Admissibility,
        Error::Grid(_) => WildcatStatus::Grid,
        Error::FrontierNotBracketed { .. } => WildcatStatus::FrontierNotBracketed,
        Error::NonMonotoneFrontier { .. } => WildcatStatus::NonMonotoneFrontier,
        Error::NoRoot(_) => WildcatStatus::NoRoot,
        Error::Region(_) => WildcatStatus::Region,
        Error::TimeOutOfRange { .. } => WildcatStatus::TimeOutOfRange,
        Error::InsufficientData(_) => WildcatStatus::InsufficientData,
        Error::Parse(_) => WildcatStatus::Parse,
        Error::Numerical(_) => WildcatStatus::Numerical,
        Error::Io(_) => WildcatStatus::Io,
    }
}

fn guard(body: impl FnOnce() -> Result<(), (WildcatStatus, String)>) -> WildcatStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => WildcatStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic crossed the FFI boundary");
            WildcatStatus::Panic
        }
    }
}

fn fail(err: Error) -> (WildcatStatus, String) {
    (status_of(&err), err.to_string())
}

fn null_arg(name: &str) -> (WildcatStatus, String) {
    (WildcatStatus::NullArgument, format!("{name} is null"))
}

/// Opaque handle to a validated model.
pub struct WildcatModel(Model);

/// Opaque handle to a solved value surface.
pub struct WildcatSurface(ValueSurface);

/// Copies the last error message of the current thread into `buf`
/// (truncated, always NUL-terminated) and returns the full message length.
/// A zero-length buffer is allowed; the return value then sizes a retry.
///
/// # Safety
/// Unless `buf` is null or `len` is 0, `buf` must point to `len` writable
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn wildcat_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Validates model parameters and allocates a model handle.
///
/// # Safety
/// `out` must be a valid pointer. On `Ok` the caller owns the handle and
/// must release it with [`wildcat_model_free`].
#[no_mangle]
pub unsafe extern "C" fn wildcat_model_new(
    alpha: f64,
    r: f64,
    a: f64,
    lambda: f64,
    k: f64,
    out: *mut *mut WildcatModel,
) -> WildcatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let model = ModelParams {
            alpha,
            r,
            a,
            lambda,
            k,
        }
        .validate()
        .map_err(fail)?;
        *out = Box::into_raw(Box::new(WildcatModel(model)));
        Ok(())
    })
}

/// Releases a model handle. Null is a no-op.
///
/// # Safety
/// `model` must have come from [`wildcat_model_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn wildcat_model_free(model: *mut WildcatModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

macro_rules! deref {
    ($ptr:expr, $name:literal) => {
        match $ptr.as_ref() {
            Some(v) => v,
            None => return Err(null_arg($name)),
        }
    };
}

macro_rules! write_out {
    ($out:expr, $value:expr) => {{
        if $out.is_null() {
            return Err(null_arg("out"));
        }
        *$out = $value;
        Ok(())
    }};
}

/// Dimensionless cost ratio `epsilon = k / (lambda U(a))`.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wildcat_model_epsilon(
    model: *const WildcatModel,
    out: *mut f64,
) -> WildcatStatus {
    guard(|| {
        let m = deref!(model, "model");
        write_out!(out, m.0.epsilon())
    })
}

/// Hotelling value `U(R)` of consuming a known stock with no exploration.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wildcat_hotelling_value(
    model: *const WildcatModel,
    reserves: f64,
    out: *mut f64,
) -> WildcatStatus {
    guard(|| {
        let m = deref!(model, "model");
        let v = m.0.hotelling_value(reserves).map_err(fail)?;
        write_out!(out, v)
    })
}

/// Hotelling shadow price `U'(R)`.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wildcat_hotelling_price(
    model: *const WildcatModel,
    reserves: f64,
    out: *mut f64,
) -> WildcatStatus {
    guard(|| {
        let m = deref!(model, "model");
        let v = m.0.hotelling_price(reserves).map_err(fail)?;
        write_out!(out, v)
    })
}

/// Costless-exploration value `E[U(R + a N_x)]`, the upper bound of the
/// value sandwich. `truncation_tol` bounds the truncated series tail.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wildcat_full_information_value(
    model: *const WildcatModel,
    x: f64,
    reserves: f64,
    truncation_tol: f64,
    out: *mut f64,
) -> WildcatStatus {
    guard(|| {
        let m = deref!(model, "model");
        let v = m
            .0
            .full_information_value(x, reserves, truncation_tol)
            .map_err(fail)?;
        write_out!(out, v)
    })
}

/// Frontier anchor `R*(0)` from the exhaustion-limit root equation.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wildcat_frontier_at_zero(
    model: *const WildcatModel,
    out: *mut f64,
) -> WildcatStatus {
    guard(|| {
        let m = deref!(model, "model");
        let v = solver::frontier_at_zero(&m.0).map_err(fail)?;
        write_out!(out, v)
    })
}

/// Solves the value surface on `[0, x_max] x [0, r_max]`.
///
/// Pass 0 for `x_step`, `r_step` or `r_max` to use the parameter-aware
/// defaults (the reserve range then anchors at the frontier anchor).
///
/// # Safety
/// `model` and `out` must be valid pointers. On `Ok` the caller owns the
/// handle and must release it with [`wildcat_surface_free`].
#[no_mangle]
pub unsafe extern "C" fn wildcat_solve(
    model: *const WildcatModel,
    x_max: f64,
    x_step: f64,
    r_step: f64,
    r_max: f64,
    out: *mut *mut WildcatSurface,
) -> WildcatStatus {
    guard(|| {
        let m = deref!(model, "model");
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let (x_default, r_default) = SolverGrid::default_steps(&m.0);
        let x_step = if x_step > 0.0 { x_step } else { x_default };
        let r_step = if r_step > 0.0 { r_step } else { r_default };
        let r_max = if r_max > 0.0 {
            r_max
        } else {
            SolverGrid::default_r_max(&m.0, r_step).map_err(fail)?
        };
        let grid = SolverGrid::regular(x_max, x_step, r_max, r_step).map_err(fail)?;
        let surface = solver::solve(&m.0, grid).map_err(fail)?;
        *out = Box::into_raw(Box::new(WildcatSurface(surface)));
        Ok(())
    })
}

/// Releases a surface handle. Null is a no-op.
///
/// # Safety
/// `surface` must have come from [`wildcat_solve`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn wildcat_surface_free(surface: *mut WildcatSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

/// Value `V(x, R)`.
///
/// # Safety
/// `surface` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wildcat_surface_value_at(
    surface: *const WildcatSurface,
    x: f64,
    reserves: f64,
    out: *mut f64,
) -> WildcatStatus {
    guard(|| {
        let s = deref!(surface, "surface");
        let v = s.0.value_at(x, reserves).map_err(fail)?;
        write_out!(out, v)
    })
}

/// Shadow price `V_R(x, R)`.
///
/// # Safety
/// `surface` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wildcat_surface_price_at(
    surface: *const WildcatSurface,
    x: f64,
    reserves: f64,
    out: *mut f64,
) -> WildcatStatus {
    guard(|| {
        let s = deref!(surface, "surface");
        let v = s.0.price_at(x, reserves).map_err(fail)?;
        write_out!(out, v)
    })
}

/// Critical reserve level and critical price at unexplored area `x`.
/// Either out-pointer may be null to skip that value.
///
/// # Safety
/// `surface` must be a valid pointer; non-null out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wildcat_surface_frontier(
    surface: *const WildcatSurface,
    x: f64,
    r_star: *mut f64,
    p_star: *mut f64,
) -> WildcatStatus {
    guard(|| {
        let s = deref!(surface, "surface");
        if !(0.0..=s.0.x_max()).contains(&x) {
            return Err(fail(Error::Grid(format!(
                "x = {x} outside solved range [0, {}]",
                s.0.x_max()
            ))));
        }
        if !r_star.is_null() {
            *r_star = s.0.frontier().r_star_at(x);
        }
        if !p_star.is_null() {
            *p_star = s.0.frontier().p_star_at(x);
        }
        Ok(())
    })
}

/// Simulates one optimal-strategy path on the RNG stream
/// `(seed, stream_id)` and samples it at `times[0..n_times]`, writing the
/// sampled series into the caller-provided arrays (each of length
/// `n_times`; any may be null to skip). `exhausted` entries are 0/1.
///
/// # Safety
/// `surface` must be valid; `times` must point to `n_times` readable
/// doubles; non-null output arrays must hold `n_times` writable elements.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn wildcat_sample_path(
    surface: *const WildcatSurface,
    x0: f64,
    r0: f64,
    seed: u64,
    stream_id: u64,
    horizon: f64,
    times: *const f64,
    n_times: usize,
    price: *mut f64,
    reserves: *mut f64,
    explored_area: *mut f64,
    consumption_rate: *mut f64,
    exhausted: *mut u8,
) -> WildcatStatus {
    guard(|| {
        let s = deref!(surface, "surface");
        if times.is_null() {
            return Err(null_arg("times"));
        }
        let times = std::slice::from_raw_parts(times, n_times);
        let path =
            simulate_path(&s.0, x0, r0, RngStream::new(seed, stream_id), horizon).map_err(fail)?;
        let samples = sample_path(&s.0, &path, times).map_err(fail)?;
        for (i, pt) in samples.iter().enumerate() {
            if !price.is_null() {
                *price.add(i) = pt.price;
            }
            if !reserves.is_null() {
                *reserves.add(i) = pt.reserves;
            }
            if !explored_area.is_null() {
                *explored_area.add(i) = pt.explored_area;
            }
            if !consumption_rate.is_null() {
                *consumption_rate.add(i) = pt.consumption_rate;
            }
            if !exhausted.is_null() {
                *exhausted.add(i) = pt.exhausted as u8;
            }
        }
        Ok(())
    })
}
