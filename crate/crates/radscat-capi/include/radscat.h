/* C interface to the radscat scattering solver. Generated by cbindgen; do not edit. */

#ifndef RADSCAT_H
#define RADSCAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of a fallible call.
 */
typedef enum RadscatStatus {
  /**
   * Success; out-pointers hold results.
   */
  RADSCAT_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  RADSCAT_STATUS_NULL_POINTER = 1,
  /**
   * Arguments were rejected before any numerics ran.
   */
  RADSCAT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The solver failed; see radscat_last_error().
   */
  RADSCAT_STATUS_SOLVE_FAILED = 3,
  /**
   * An internal invariant broke; the handle state is still valid.
   */
  RADSCAT_STATUS_PANIC = 4,
} RadscatStatus;

/**
 * Which field a solver evaluation returns.
 */
typedef enum RadscatField {
  /**
   * Scattered field only.
   */
  RADSCAT_FIELD_SCATTERED = 0,
  /**
   * Incident plus scattered.
   */
  RADSCAT_FIELD_TOTAL = 1,
  /**
   * Incident field only.
   */
  RADSCAT_FIELD_INCIDENT = 2,
} RadscatField;

/**
 * A compactly supported radially symmetric medium (opaque).
 */
typedef struct RadscatPotential RadscatPotential;

/**
 * A completed time-harmonic solve, ready for field evaluation (opaque).
 */
typedef struct RadscatSolver RadscatSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message from the most recent failure on this thread. The pointer stays
 * valid until the next failing radscat call on the same thread; never free
 * it.
 */
const char *radscat_last_error(void);

/**
 * Library version as a static string; never free it.
 */
const char *radscat_version(void);

/**
 * Smooth bump `exp(-r^2) - exp(-b^2)` truncated at `b = 2 pi`.
 *
 * # Safety
 * `out` must be valid for a single pointer write.
 */
enum RadscatStatus radscat_potential_gaussian(struct RadscatPotential **out);

/**
 * Luneburg lens profile `1 - r^2/b^2` with `b = 2 pi`.
 *
 * # Safety
 * `out` must be valid for a single pointer write.
 */
enum RadscatStatus radscat_potential_luneburg(struct RadscatPotential **out);

/**
 * Eaton lens profile, regularized near the origin, support `2 pi`.
 *
 * # Safety
 * `out` must be valid for a single pointer write.
 */
enum RadscatStatus radscat_potential_eaton(struct RadscatPotential **out);

/**
 * Constant contrast `c` on a disk of radius `b`; requires `1 + c > 0` and
 * `b > 0`.
 *
 * # Safety
 * `out` must be valid for a single pointer write.
 */
enum RadscatStatus radscat_potential_disk(double contrast,
                                          double radius,
                                          struct RadscatPotential **out);

/**
 * Piecewise-constant 0/1 profile on 20 random annuli, support `2 pi`,
 * deterministic in `seed`.
 *
 * # Safety
 * `out` must be valid for a single pointer write.
 */
enum RadscatStatus radscat_potential_random(uint64_t seed, struct RadscatPotential **out);

/**
 * The trivial medium `q = 0` with nominal support `radius > 0`.
 *
 * # Safety
 * `out` must be valid for a single pointer write.
 */
enum RadscatStatus radscat_potential_zero(double radius, struct RadscatPotential **out);

/**
 * Cubic-spline profile through `len` samples `(radii[i], values[i])`.
 * Radii must increase strictly from 0 to the support radius. The profile is
 * split into independent splines at the `nbreak` sorted interior
 * `breakpoints` (may be NULL when `nbreak` is 0), so jumps are
 * representable.
 *
 * # Safety
 * `radii` and `values` must point to `len` doubles, `breakpoints` to
 * `nbreak` doubles, and `out` must be valid for a single pointer write.
 */
enum RadscatStatus radscat_potential_table(const double *radii,
                                           const double *values,
                                           size_t len,
                                           const double *breakpoints,
                                           size_t nbreak,
                                           struct RadscatPotential **out);

/**
 * Contrast value `q(r)`; NaN when the handle is NULL.
 *
 * # Safety
 * `q` must be a live handle from a `radscat_potential_*` constructor, or
 * NULL.
 */
double radscat_potential_eval(const struct RadscatPotential *q, double r);

/**
 * Support radius `b` (the contrast vanishes for `r >= b`); NaN when the
 * handle is NULL.
 *
 * # Safety
 * `q` must be a live handle or NULL.
 */
double radscat_potential_support_radius(const struct RadscatPotential *q);

/**
 * Release a potential handle. NULL is ignored.
 *
 * # Safety
 * `q` must be NULL or a live handle, not previously freed.
 */
void radscat_potential_free(struct RadscatPotential *q);

/**
 * Solve scattering of the unit plane wave `exp(ik(x cos a + y sin a))`,
 * incidence angle `theta0 = a`, to tolerance `eps`.
 *
 * # Safety
 * `q` must be a live potential handle and `out` valid for a single pointer
 * write.
 */
enum RadscatStatus radscat_solve_plane(const struct RadscatPotential *q,
                                       double k,
                                       double theta0,
                                       double eps,
                                       struct RadscatSolver **out);

/**
 * Solve scattering of the built-in complex-source Gaussian beam.
 *
 * # Safety
 * `q` must be a live potential handle and `out` valid for a single pointer
 * write.
 */
enum RadscatStatus radscat_solve_beam(const struct RadscatPotential *q,
                                      double k,
                                      double eps,
                                      struct RadscatSolver **out);

/**
 * Solve scattering of a point source at `(x0, y0)` with complex amplitude
 * `amp_re + i amp_im`. The source must lie strictly outside the support of
 * the potential.
 *
 * # Safety
 * `q` must be a live potential handle and `out` valid for a single pointer
 * write.
 */
enum RadscatStatus radscat_solve_point(const struct RadscatPotential *q,
                                       double k,
                                       double x0,
                                       double y0,
                                       double amp_re,
                                       double amp_im,
                                       double eps,
                                       struct RadscatSolver **out);

/**
 * Evaluate one field value at `(x, y)`; writes the real and imaginary parts.
 *
 * # Safety
 * `s` must be a live solver handle; `out_re` and `out_im` must each be valid
 * for a double write.
 */
enum RadscatStatus radscat_solver_eval(const struct RadscatSolver *s,
                                       enum RadscatField which,
                                       double x,
                                       double y,
                                       double *out_re,
                                       double *out_im);

/**
 * Evaluate one field at `n` points; fills `out_re[i] + i out_im[i]` for the
 * point `(xs[i], ys[i])`.
 *
 * # Safety
 * `s` must be a live solver handle; `xs`, `ys`, `out_re`, `out_im` must each
 * point to `n` doubles.
 */
enum RadscatStatus radscat_solver_eval_many(const struct RadscatSolver *s,
                                            enum RadscatField which,
                                            const double *xs,
                                            const double *ys,
                                            size_t n,
                                            double *out_re,
                                            double *out_im);

/**
 * Largest retained angular order; the expansion keeps `|m| <=` this value.
 * Returns 0 when the handle is NULL.
 *
 * # Safety
 * `s` must be a live solver handle or NULL.
 */
size_t radscat_solver_mode_count(const struct RadscatSolver *s);

/**
 * Wavenumber the solve was performed at; NaN when the handle is NULL.
 *
 * # Safety
 * `s` must be a live solver handle or NULL.
 */
double radscat_solver_k(const struct RadscatSolver *s);

/**
 * Time-averaged outgoing power flux of the scattered field through the
 * circle of the given radius (must enclose the support). NaN when the
 * handle is NULL.
 *
 * # Safety
 * `s` must be a live solver handle or NULL.
 */
double radscat_solver_outgoing_flux(const struct RadscatSolver *s, double radius);

/**
 * Release a solver handle. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a live handle, not previously freed.
 */
void radscat_solver_free(struct RadscatSolver *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADSCAT_H */
