#ifndef OPTEXEC_H
#define OPTEXEC_H

/* Generated by cbindgen from the optexec-capi crate. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call. Zero is success; anything else is an error
// and `optexec_last_error` holds a message describing it.
typedef enum OptexecStatus {
  OPTEXEC_STATUS_OK = 0,
  // A required pointer argument was null.
  OPTEXEC_STATUS_NULL_POINTER = 1,
  // Parameters are malformed or inconsistent.
  OPTEXEC_STATUS_CONFIG = 2,
  // The request is well formed but outside the implemented scope.
  OPTEXEC_STATUS_UNSUPPORTED = 3,
  // Inputs outside the mathematical domain of the operation.
  OPTEXEC_STATUS_DOMAIN = 4,
  // The backward sweep lost positivity or produced a non-finite value.
  OPTEXEC_STATUS_SOLVER = 5,
  OPTEXEC_STATUS_IO = 6,
  // An internal panic was caught at the boundary.
  OPTEXEC_STATUS_PANIC = 7,
  // An output buffer is shorter than the data; nothing was written.
  OPTEXEC_STATUS_BUFFER_TOO_SMALL = 8,
} OptexecStatus;

// Solved optimal execution law. Opaque: create with `optexec_law_new`,
// release with `optexec_law_free`.
typedef struct OptexecLaw OptexecLaw;

// Model with constant coefficients and constant targets. Time runs over
// `[0, horizon]` on a uniform grid of `n_steps` steps.
typedef struct OptexecModelParams {
  // Initial impact level, must be positive.
  double gamma0;
  // Impact drift rate.
  double mu;
  // Impact volatility.
  double sigma;
  // Resilience rate, must be nonnegative.
  double rho;
  // Resilience volatility.
  double eta;
  // Correlation between impact and resilience noise, in [-1, 1].
  double rbar;
  // Running-target penalty weight, must be nonnegative.
  double lambda;
  // Position immediately before time zero.
  double x0;
  // Price deviation immediately before time zero.
  double d0;
  // Trading horizon, must be positive.
  double horizon;
  // Terminal position target.
  double xi;
  // Running position target (only priced when lambda > 0).
  double zeta;
  // Number of grid steps, must be positive.
  size_t n_steps;
} OptexecModelParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Solves the model described by `params` and stores a handle in `*out`.
//
// # Safety
// `params` must point to a valid `OptexecModelParams` and `out` to writable
// pointer storage. On success `*out` owns the law and must be released with
// `optexec_law_free`; on failure `*out` is set to null.
enum OptexecStatus optexec_law_new(const struct OptexecModelParams *params,
                                   struct OptexecLaw **out);

// Releases a law handle. Null is a no-op.
//
// # Safety
// `law` must be null or a pointer returned by `optexec_law_new` that has not
// been freed already.
void optexec_law_free(struct OptexecLaw *law);

// Writes the number of grid nodes (steps + 1) to `*out`. This is the buffer
// length the gain accessors require.
//
// # Safety
// `law` must be a live handle from `optexec_law_new`; `out` must be writable.
enum OptexecStatus optexec_law_n_nodes(const struct OptexecLaw *law, size_t *out);

// Copies the quadratic value gain at every grid node into `buf`.
//
// # Safety
// `law` must be a live handle; `buf` must point to at least `len` writable
// doubles, with `len` at least the node count from `optexec_law_n_nodes`.
enum OptexecStatus optexec_law_value_gain(const struct OptexecLaw *law, double *buf, size_t len);

// Copies the feedback gain (the coefficient multiplying the hidden deviation
// in the optimal trading rate) at every grid node into `buf`.
//
// # Safety
// Same contract as `optexec_law_value_gain`.
enum OptexecStatus optexec_law_feedback_gain(const struct OptexecLaw *law, double *buf, size_t len);

// Evaluates the optimal expected cost through the solved value function,
// averaging the path-dependent part over `n_paths` Monte-Carlo paths drawn
// from `seed`. Deterministic models report a zero standard error.
//
// # Safety
// `law` must be a live handle; `mean` and `std_error` must be writable.
enum OptexecStatus optexec_law_expected_cost(const struct OptexecLaw *law,
                                             uint64_t seed,
                                             uint64_t n_paths,
                                             double *mean,
                                             double *std_error);

// Simulates the optimal strategy on `n_paths` paths drawn from `seed` and
// reports the Monte-Carlo mean cost and its standard error. Agrees with
// `optexec_law_expected_cost` up to sampling noise and O(dt) discretization.
//
// # Safety
// Same contract as `optexec_law_expected_cost`.
enum OptexecStatus optexec_law_simulated_cost(const struct OptexecLaw *law,
                                              uint64_t seed,
                                              uint64_t n_paths,
                                              double *mean,
                                              double *std_error);

// Principal branch of the Lambert W function, defined for `z >= -1/e`.
//
// # Safety
// `out` must be writable.
enum OptexecStatus optexec_lambert_w0(double z, double *out);

// Copies the current thread's last error message into `buf` (truncated,
// always NUL-terminated when `cap > 0`) and returns the full message length
// in bytes, excluding the terminator. Call with a null `buf` or `cap == 0`
// to query the required size.
//
// # Safety
// If `buf` is non-null it must point to at least `cap` writable bytes.
size_t optexec_last_error(char *buf, size_t cap);

// Version of the library as a static NUL-terminated string.
const char *optexec_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* OPTEXEC_H */
