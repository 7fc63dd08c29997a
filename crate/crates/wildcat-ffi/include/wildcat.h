#ifndef WILDCAT_H
#define WILDCAT_H

/* Generated by cbindgen from wildcat-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum {
  WILDCAT_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  WILDCAT_STATUS_NULL_ARGUMENT = 1,
  /**
   * An argument lies outside its mathematical domain.
   */
  WILDCAT_STATUS_DOMAIN = 2,
  /**
   * Parameters violate the admissibility condition `U(a) >= k/lambda`.
   */
  WILDCAT_STATUS_ADMISSIBILITY = 3,
  /**
   * Query outside the solved grid range.
   */
  WILDCAT_STATUS_GRID = 4,
  /**
   * The frontier could not be bracketed inside the reserve grid.
   */
  WILDCAT_STATUS_FRONTIER_NOT_BRACKETED = 5,
  /**
   * The computed frontier was non-monotone (grid too coarse).
   */
  WILDCAT_STATUS_NON_MONOTONE_FRONTIER = 6,
  /**
   * A scalar root could not be bracketed.
   */
  WILDCAT_STATUS_NO_ROOT = 7,
  /**
   * Strategy operation on the wrong side of the frontier.
   */
  WILDCAT_STATUS_REGION = 8,
  /**
   * Sampling time outside the simulated horizon.
   */
  WILDCAT_STATUS_TIME_OUT_OF_RANGE = 9,
  /**
   * Not enough data for a statistical check.
   */
  WILDCAT_STATUS_INSUFFICIENT_DATA = 10,
  /**
   * Configuration parse failure.
   */
  WILDCAT_STATUS_PARSE = 11,
  /**
   * Internal iteration failed to converge.
   */
  WILDCAT_STATUS_NUMERICAL = 12,
  /**
   * I/O failure.
   */
  WILDCAT_STATUS_IO = 13,
  /**
   * A panic was caught at the boundary.
   */
  WILDCAT_STATUS_PANIC = 14,
} WildcatStatus;

/**
 * Opaque handle to a validated model.
 */
typedef struct WildcatModel WildcatModel;

/**
 * Opaque handle to a solved value surface.
 */
typedef struct WildcatSurface WildcatSurface;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of the current thread into `buf`
 * (truncated, always NUL-terminated) and returns the full message length.
 * A zero-length buffer is allowed; the return value then sizes a retry.
 *
 * # Safety
 * Unless `buf` is null or `len` is 0, `buf` must point to `len` writable
 * bytes.
 */
uintptr_t wildcat_last_error(char *buf, uintptr_t len);

/**
 * Validates model parameters and allocates a model handle.
 *
 * # Safety
 * `out` must be a valid pointer. On `Ok` the caller owns the handle and
 * must release it with [`wildcat_model_free`].
 */
WildcatStatus wildcat_model_new(double alpha,
                                double r,
                                double a,
                                double lambda,
                                double k,
                                WildcatModel **out);

/**
 * Releases a model handle. Null is a no-op.
 *
 * # Safety
 * `model` must have come from [`wildcat_model_new`] and not be freed twice.
 */
void wildcat_model_free(WildcatModel *model);

/**
 * Dimensionless cost ratio `epsilon = k / (lambda U(a))`.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
WildcatStatus wildcat_model_epsilon(const WildcatModel *model, double *out);

/**
 * Hotelling value `U(R)` of consuming a known stock with no exploration.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
WildcatStatus wildcat_hotelling_value(const WildcatModel *model, double reserves, double *out);

/**
 * Hotelling shadow price `U'(R)`.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
WildcatStatus wildcat_hotelling_price(const WildcatModel *model, double reserves, double *out);

/**
 * Costless-exploration value `E[U(R + a N_x)]`, the upper bound of the
 * value sandwich. `truncation_tol` bounds the truncated series tail.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
WildcatStatus wildcat_full_information_value(const WildcatModel *model,
                                             double x,
                                             double reserves,
                                             double truncation_tol,
                                             double *out);

/**
 * Frontier anchor `R*(0)` from the exhaustion-limit root equation.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
WildcatStatus wildcat_frontier_at_zero(const WildcatModel *model, double *out);

/**
 * Solves the value surface on `[0, x_max] x [0, r_max]`.
 *
 * Pass 0 for `x_step`, `r_step` or `r_max` to use the parameter-aware
 * defaults (the reserve range then anchors at the frontier anchor).
 *
 * # Safety
 * `model` and `out` must be valid pointers. On `Ok` the caller owns the
 * handle and must release it with [`wildcat_surface_free`].
 */
WildcatStatus wildcat_solve(const WildcatModel *model,
                            double x_max,
                            double x_step,
                            double r_step,
                            double r_max,
                            WildcatSurface **out);

/**
 * Releases a surface handle. Null is a no-op.
 *
 * # Safety
 * `surface` must have come from [`wildcat_solve`] and not be freed twice.
 */
void wildcat_surface_free(WildcatSurface *surface);

/**
 * Value `V(x, R)`.
 *
 * # Safety
 * `surface` and `out` must be valid pointers.
 */
WildcatStatus wildcat_surface_value_at(const WildcatSurface *surface,
                                       double x,
                                       double reserves,
                                       double *out);

/**
 * Shadow price `V_R(x, R)`.
 *
 * # Safety
 * `surface` and `out` must be valid pointers.
 */
WildcatStatus wildcat_surface_price_at(const WildcatSurface *surface,
                                       double x,
                                       double reserves,
                                       double *out);

/**
 * Critical reserve level and critical price at unexplored area `x`.
 * Either out-pointer may be null to skip that value.
 *
 * # Safety
 * `surface` must be a valid pointer; non-null out-pointers must be valid.
 */
WildcatStatus wildcat_surface_frontier(const WildcatSurface *surface,
                                       double x,
                                       double *r_star,
                                       double *p_star);

/**
 * Simulates one optimal-strategy path on the RNG stream
 * `(seed, stream_id)` and samples it at `times[0..n_times]`, writing the
 * sampled series into the caller-provided arrays (each of length
 * `n_times`; any may be null to skip). `exhausted` entries are 0/1.
 *
 * # Safety
 * `surface` must be valid; `times` must point to `n_times` readable
 * doubles; non-null output arrays must hold `n_times` writable elements.
 */
WildcatStatus wildcat_sample_path(const WildcatSurface *surface,
                                  double x0,
                                  double r0,
                                  uint64_t seed,
                                  uint64_t stream_id,
                                  double horizon,
                                  const double *times,
                                  uintptr_t n_times,
                                  double *price,
                                  double *reserves,
                                  double *explored_area,
                                  double *consumption_rate,
                                  uint8_t *exhausted);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WILDCAT_H */
