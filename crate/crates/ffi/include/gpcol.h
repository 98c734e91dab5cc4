#ifndef GPCOL_H
#define GPCOL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GpcolStatus {
  GPCOL_STATUS_OK = 0,
  GPCOL_STATUS_NULL_POINTER = 1,
  GPCOL_STATUS_INVALID_ARGUMENT = 2,
  GPCOL_STATUS_CONFIG = 3,
  GPCOL_STATUS_NUMERICAL = 4,
  GPCOL_STATUS_IO = 5,
  GPCOL_STATUS_PANIC = 6,
} GpcolStatus;

/**
 * Opaque handle to a resolved problem.
 */
typedef struct GpcolProblem GpcolProblem;

/**
 * Opaque handle to a conditioned posterior.
 */
typedef struct GpcolSolution GpcolSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *gpcol_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated and
 * NUL-terminated) and returns the full message length excluding the NUL.
 * Returns 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t gpcol_last_error_message(char *buf, size_t len);

/**
 * Builds a problem from a JSON config document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum GpcolStatus gpcol_problem_from_json(const char *json, struct GpcolProblem **out);

/**
 * Builds one of the built-in cases (`heat1d`, `disk_poisson`,
 * `disk_gaussian_source`, `star_gaussian_source`). Zero counts select the
 * case defaults.
 *
 * # Safety
 * `case_id` must be a NUL-terminated string; `out` must be writable.
 */
enum GpcolStatus gpcol_problem_from_case(const char *case_id,
                                         size_t n_interior,
                                         size_t n_boundary,
                                         struct GpcolProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle from a `gpcol_problem_*` constructor
 * that has not been freed.
 */
void gpcol_problem_free(struct GpcolProblem *problem);

/**
 * Spatial dimension, or 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t gpcol_problem_dimension(const struct GpcolProblem *problem);

/**
 * Number of interior and boundary observations.
 *
 * # Safety
 * `problem` must be a live handle; the outputs must be writable.
 */
enum GpcolStatus gpcol_problem_counts(const struct GpcolProblem *problem,
                                      size_t *n_interior,
                                      size_t *n_boundary);

/**
 * Chooses the lengthscale (fixed or by likelihood search) and conditions
 * the prior.
 *
 * # Safety
 * `problem` must be a live handle; `out` must be writable.
 */
enum GpcolStatus gpcol_problem_solve(const struct GpcolProblem *problem,
                                     struct GpcolSolution **out);

/**
 * # Safety
 * `solution` must be null or a live handle from [`gpcol_problem_solve`].
 */
void gpcol_solution_free(struct GpcolSolution *solution);

/**
 * Lengthscale used by the posterior, or NaN for a null handle.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
double gpcol_solution_lengthscale(const struct GpcolSolution *solution);

/**
 * Diagonal jitter added before factorization, or NaN for a null handle.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
double gpcol_solution_jitter(const struct GpcolSolution *solution);

/**
 * Spatial dimension, or 0 for a null handle.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
size_t gpcol_solution_dimension(const struct GpcolSolution *solution);

/**
 * Posterior mean and variance at `n_points` points. Either output may be
 * null to skip it.
 *
 * # Safety
 * `points` must hold `n_points * dimension` doubles; non-null outputs must
 * hold `n_points` doubles.
 */
enum GpcolStatus gpcol_solution_evaluate(const struct GpcolSolution *solution,
                                         const double *points,
                                         size_t n_points,
                                         double *mean_out,
                                         double *variance_out);

/**
 * Posterior covariance between `x` and `x_prime`.
 *
 * # Safety
 * `x` and `x_prime` must each hold `dimension` doubles; `out` must be writable.
 */
enum GpcolStatus gpcol_solution_covariance(const struct GpcolSolution *solution,
                                           const double *x,
                                           const double *x_prime,
                                           double *out);

/**
 * Mixed derivative `d^alpha_x d^beta_x' c(x, x')` of the squared-exponential
 * kernel with signal `signal` and per-coordinate `lengthscales`.
 *
 * # Safety
 * `lengthscales`, `alpha`, `beta`, `x` and `x_prime` must each hold `dim`
 * elements; `out` must be writable.
 */
enum GpcolStatus gpcol_kernel_derivative(double signal,
                                         const double *lengthscales,
                                         size_t dim,
                                         const uint32_t *alpha,
                                         const uint32_t *beta,
                                         const double *x,
                                         const double *x_prime,
                                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GPCOL_H */
