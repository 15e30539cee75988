#ifndef BLSTAB_H
#define BLSTAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum blstab_status {
  /**
   * Success.
   */
  BLSTAB_OK = 0,
  /**
   * A null handle or output pointer was passed.
   */
  BLSTAB_NULL_POINTER = 1,
  /**
   * Invalid argument or configuration.
   */
  BLSTAB_INVALID_ARGUMENT = 2,
  /**
   * The computation failed numerically.
   */
  BLSTAB_NUMERICAL_ERROR = 3,
  /**
   * A panic was caught at the ABI boundary.
   */
  BLSTAB_INTERNAL_ERROR = 4,
} blstab_status;

/**
 * Opaque half-line grid.
 */
typedef struct blstab_grid blstab_grid;

/**
 * Opaque background shear profile.
 */
typedef struct blstab_profile blstab_profile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL terminated,
 * truncated to `len`). Returns the untruncated length.
 *
 * # Safety
 * `buf` must point to `len` writable bytes, or be null (query mode).
 */
uintptr_t blstab_last_error(char *buf, uintptr_t len);

/**
 * Crate version as a static NUL-terminated string.
 */
const char *blstab_version(void);

/**
 * Exponentially decaying shear profile `U = 1 - exp(-z)`.
 */
struct blstab_profile *blstab_profile_exponential(void);

/**
 * Error-function shear profile.
 */
struct blstab_profile *blstab_profile_erf(void);

/**
 * Inflected control profile `U = (1 + tanh(b (z - z0))) / 2` blended to the wall.
 */
struct blstab_profile *blstab_profile_tanh(double b, double z0);

/**
 * Release a profile handle. Null is ignored.
 *
 * # Safety
 * `p` must be null or a pointer obtained from a `blstab_profile_*` constructor,
 * not yet freed.
 */
void blstab_profile_free(struct blstab_profile *p);

/**
 * Evaluate the `k`-th derivative of the profile at height `z` (`k = 0` is
 * the profile itself, `k <= 4`).
 *
 * # Safety
 * `p` must be a live profile handle and `out` a valid pointer.
 */
enum blstab_status blstab_profile_deriv(const struct blstab_profile *p,
                                        int k,
                                        double z,
                                        double *out);

/**
 * Check the profile against the admissibility hypotheses; writes 1 into
 * `out_pass` when all of them hold.
 *
 * # Safety
 * `p` must be a live profile handle and `out_pass` a valid pointer.
 */
enum blstab_status blstab_profile_check(const struct blstab_profile *p, int *out_pass);

/**
 * Build a half-line grid with `n` nodes. `spectral != 0` selects the
 * spectral backend, otherwise finite differences. The domain is truncated
 * at `z_max` with wall clustering strength `cluster`.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives an owned handle.
 */
enum blstab_status blstab_grid_new(uintptr_t n,
                                   int spectral,
                                   double z_max,
                                   double cluster,
                                   struct blstab_grid **out);

/**
 * Release a grid handle. Null is ignored.
 *
 * # Safety
 * `g` must be null or a pointer obtained from `blstab_grid_new`, not yet freed.
 */
void blstab_grid_free(struct blstab_grid *g);

/**
 * Leading eigenvalue of the linearized operator at wavenumber `alpha` and
 * viscosity `nu`. `out_found` is 1 when an accepted eigenvalue exists, in
 * which case `out_re`/`out_im` carry it.
 *
 * # Safety
 * All handles must be live and all output pointers valid.
 */
enum blstab_status blstab_os_leading(const struct blstab_profile *p,
                                     const struct blstab_grid *g,
                                     double alpha,
                                     double nu,
                                     double *out_re,
                                     double *out_im,
                                     int *out_found);

/**
 * Maximize the growth rate over wavenumbers at viscosity `nu` using
 * `samples` coarse scan points. `out_found` is 1 when an unstable mode
 * exists; then `out_alpha` is the maximizer and `out_re`/`out_im` the
 * eigenvalue there.
 *
 * # Safety
 * All handles must be live and all output pointers valid.
 */
enum blstab_status blstab_max_growth(const struct blstab_profile *p,
                                     const struct blstab_grid *g,
                                     double nu,
                                     uintptr_t samples,
                                     double *out_alpha,
                                     double *out_re,
                                     double *out_im,
                                     int *out_found);

/**
 * Number of unstable inviscid modes at wavenumber `alpha`.
 *
 * # Safety
 * All handles must be live and `out_count` a valid pointer.
 */
enum blstab_status blstab_rayleigh_unstable_count(const struct blstab_profile *p,
                                                  const struct blstab_grid *g,
                                                  double alpha,
                                                  uintptr_t *out_count);

/**
 * Parse a profile kind name ("exponential", "erf", "jet") into a handle;
 * returns null and sets the error message on unknown names.
 *
 * # Safety
 * `kind` must be a valid NUL-terminated string.
 */
struct blstab_profile *blstab_profile_by_name(const char *kind);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLSTAB_H */
