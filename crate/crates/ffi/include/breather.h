#ifndef BREATHER_H
#define BREATHER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Values 2 to 4 match the command line exit codes.
 */
typedef enum KgbStatus {
  KGB_STATUS_OK = 0,
  /**
   * Null pointer, bad string or undersized buffer.
   */
  KGB_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Parameter out of range or a solver guard tripped.
   */
  KGB_STATUS_GUARD = 2,
  KGB_STATUS_NO_CONVERGENCE = 3,
  KGB_STATUS_IO = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  KGB_STATUS_PANIC = 5,
} KgbStatus;

/**
 * Assembled breather.
 */
typedef struct KgbBreather KgbBreather;

/**
 * Continuum ground state.
 */
typedef struct KgbProfile KgbProfile;

/**
 * Numerical settings for [`kgb_breather_new`].
 */
typedef struct KgbConfig {
  uint32_t l_max;
  /**
   * Truncation radius; 0 derives it from `decay_budget`.
   */
  uint32_t k;
  double decay_budget;
  double kernel_tol;
  /**
   * Nonzero to run the Hessian diagnostics.
   */
  int32_t hessian;
} KgbConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *kgb_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, 0 if there is none.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t kgb_last_error(char *buf, size_t len);

struct KgbConfig kgb_config_default(void);

/**
 * Solves for the continuum ground state in dimension `n` with exponent `p`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum KgbStatus kgb_profile_new(uint32_t n, double p, double tol, struct KgbProfile **out);

/**
 * Frequency parameter `m` of the profile; NaN for a null handle.
 *
 * # Safety
 * `h` must be null or a live profile handle.
 */
double kgb_profile_m(const struct KgbProfile *h);

/**
 * Profile value at radius `r`; NaN for a null handle.
 *
 * # Safety
 * `h` must be null or a live profile handle.
 */
double kgb_profile_eval(const struct KgbProfile *h, double r);

/**
 * # Safety
 * `h` must be null or a handle from [`kgb_profile_new`] not yet freed.
 */
void kgb_profile_free(struct KgbProfile *h);

/**
 * Assembles a breather. `mode` is `st`, `p`, `h1` or `h2`; `config` may be null
 * for the defaults.
 *
 * # Safety
 * `mode` must be a NUL-terminated string, `config` null or valid, `out` valid for writes.
 */
enum KgbStatus kgb_breather_new(uint32_t n,
                                double p,
                                double a,
                                double mu,
                                const char *mode,
                                const struct KgbConfig *config,
                                struct KgbBreather **out);

/**
 * # Safety
 * `h` must be null or a handle from [`kgb_breather_new`] not yet freed.
 */
void kgb_breather_free(struct KgbBreather *h);

/**
 * Breather frequency `ω`; NaN for a null handle.
 *
 * # Safety
 * `h` must be null or a live breather handle.
 */
double kgb_breather_omega(const struct KgbBreather *h);

/**
 * Number of sites of the full square lattice `[-K, K]ⁿ` (or its bond-shifted
 * variant); the length of buffers passed to [`kgb_breather_displacement`].
 *
 * # Safety
 * `h` must be null or a live breather handle.
 */
size_t kgb_breather_sites(const struct KgbBreather *h);

/**
 * Pointwise and discrete KG residuals.
 *
 * # Safety
 * `h` live handle; output pointers valid for writes.
 */
enum KgbStatus kgb_breather_residual(const struct KgbBreather *h,
                                     double *pointwise,
                                     double *discrete);

/**
 * Distance to the reference solution in the H² time norm and the sup norm.
 *
 * # Safety
 * `h` live handle; output pointers valid for writes.
 */
enum KgbStatus kgb_breather_errors(const struct KgbBreather *h, double *e_h2, double *e_sup);

/**
 * Displacement `q(s)` at physical time `s` on the full lattice, row-major.
 *
 * # Safety
 * `h` live handle; `buf` valid for `len` doubles.
 */
enum KgbStatus kgb_breather_displacement(const struct KgbBreather *h,
                                         double s,
                                         double *buf,
                                         size_t len);

/**
 * Leapfrog over whole periods from `(q(0), 0)`.
 *
 * # Safety
 * `h` live handle; output pointers valid for writes.
 */
enum KgbStatus kgb_breather_integrate(const struct KgbBreather *h,
                                      uint32_t steps_per_period,
                                      uint32_t periods,
                                      double *return_error,
                                      double *energy_drift);

/**
 * Writes `<dir>/<stem>.json` and the binary field next to it.
 *
 * # Safety
 * `h` live handle; `dir` and `stem` NUL-terminated strings.
 */
enum KgbStatus kgb_breather_write(const struct KgbBreather *h, const char *dir, const char *stem);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BREATHER_H */
