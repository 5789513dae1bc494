#ifndef CROSSOVER_H
#define CROSSOVER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  CROSSOVER_MODEL_NULL = 0,
  CROSSOVER_MODEL_TOY = 1,
} CrossoverModel;

typedef enum {
  CROSSOVER_STATUS_OK = 0,
  CROSSOVER_STATUS_NULL_POINTER = 1,
  CROSSOVER_STATUS_USAGE = 2,
  CROSSOVER_STATUS_DOMAIN = 3,
  CROSSOVER_STATUS_NUMERICAL = 4,
  CROSSOVER_STATUS_PRECONDITION = 5,
  CROSSOVER_STATUS_TRUNCATION = 6,
  CROSSOVER_STATUS_DIVERGENCE = 7,
  CROSSOVER_STATUS_DOMAIN_VIOLATION = 8,
  CROSSOVER_STATUS_MODEL = 9,
  CROSSOVER_STATUS_BUFFER_TOO_SMALL = 10,
  CROSSOVER_STATUS_PANIC = 11,
} CrossoverStatus;

/**
 * Approximate orbit on its default or a user window.
 */
typedef struct CrossoverFlow CrossoverFlow;

/**
 * Kernel coefficients and covariance evaluators at fixed (L, eps).
 */
typedef struct CrossoverKernels CrossoverKernels;

/**
 * A solved trajectory.
 */
typedef struct CrossoverOrbit CrossoverOrbit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the next call on the thread.
 */
const char *crossover_last_error(void);

/**
 * Builds the kernels at (l, eps).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle pointer.
 */
CrossoverStatus crossover_kernels_new(uint32_t l, double eps, CrossoverKernels **out);

/**
 * Releases a kernel handle; null is ignored.
 *
 * # Safety
 * `h` must be null or a handle from [`crossover_kernels_new`] that has not been freed.
 */
void crossover_kernels_free(CrossoverKernels *h);

/**
 * Writes a, b, C(0) and Gamma(0).
 *
 * # Safety
 * `h` must be a live kernel handle; each output pointer must be valid for one write.
 */
CrossoverStatus crossover_kernels_coefficients(const CrossoverKernels *h,
                                               double *a,
                                               double *b,
                                               double *c0,
                                               double *gamma0);

/**
 * Full covariance at radius r.
 *
 * # Safety
 * `h` must be a live kernel handle; `out` must be valid for one write.
 */
CrossoverStatus crossover_kernels_covariance(const CrossoverKernels *h, double r, double *out);

/**
 * Builds gbar_n for n in [-n_minus, n_plus]. A NaN `a` takes the kernel coefficient; a negative
 * window length takes the default window.
 *
 * # Safety
 * `out` must be valid for one write.
 */
CrossoverStatus crossover_flow_new(uint32_t l,
                                   double eps,
                                   double a,
                                   double omega0,
                                   int64_t n_minus,
                                   int64_t n_plus,
                                   CrossoverFlow **out);

/**
 * # Safety
 * `h` must be null or a handle from [`crossover_flow_new`] that has not been freed.
 */
void crossover_flow_free(CrossoverFlow *h);

/**
 * Writes the first index and the number of entries.
 *
 * # Safety
 * `h` must be a live flow handle; outputs must be valid for one write.
 */
CrossoverStatus crossover_flow_window(const CrossoverFlow *h, int64_t *lo, uintptr_t *len);

/**
 * Copies gbar_n, from the first index on, into `buf`.
 *
 * # Safety
 * `h` must be a live flow handle; `buf` must be valid for `len` writes.
 */
CrossoverStatus crossover_flow_values(const CrossoverFlow *h, double *buf, uintptr_t len);

/**
 * Solves the full trajectory with the chosen model on the default window. A NaN `a` takes the
 * kernel coefficient. `model` is a [`CrossoverModel`] value; the toy model uses its calibrated
 * coefficients.
 *
 * # Safety
 * `out` must be valid for one write.
 */
CrossoverStatus crossover_orbit_solve(uint32_t l,
                                      double eps,
                                      double a,
                                      double omega0,
                                      uint32_t model,
                                      CrossoverOrbit **out);

/**
 * # Safety
 * `h` must be null or a handle from [`crossover_orbit_solve`] that has not been freed.
 */
void crossover_orbit_free(CrossoverOrbit *h);

/**
 * Writes the first index, the number of entries, the weighted recursion residual and the
 * number of solver iterations. Any output pointer may be null.
 *
 * # Safety
 * `h` must be a live orbit handle; non-null outputs must be valid for one write.
 */
CrossoverStatus crossover_orbit_info(const CrossoverOrbit *h,
                                     int64_t *lo,
                                     uintptr_t *len,
                                     double *residual,
                                     uintptr_t *iterations);

/**
 * Copies gbar_n, g_n and mu_n; each buffer must hold the orbit length.
 *
 * # Safety
 * `h` must be a live orbit handle; each buffer must be valid for `len` writes.
 */
CrossoverStatus crossover_orbit_values(const CrossoverOrbit *h,
                                       double *gbar,
                                       double *g,
                                       double *mu,
                                       uintptr_t len);

/**
 * Gauss hypergeometric function 2F1(a, b; c; s) for |s| < 1.
 *
 * # Safety
 * `out` must be valid for one write.
 */
CrossoverStatus crossover_hyp2f1(double a, double b, double c, double s, double *out);

/**
 * Exact two-coupling orbit in units of the mass scale at coupling fraction s, for exponent nu.
 *
 * # Safety
 * `out` must be valid for one write.
 */
CrossoverStatus crossover_orbit_mass(double s, double nu, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CROSSOVER_H */
