#ifndef FAS_H
#define FAS_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FasStatus {
  FAS_STATUS_OK = 0,
  FAS_STATUS_NULL_POINTER = 1,
  FAS_STATUS_DOMAIN = 2,
  FAS_STATUS_CONFIG = 3,
  FAS_STATUS_SINGULAR_PROFILE = 4,
  FAS_STATUS_QUADRATURE = 5,
  FAS_STATUS_CONSTANTS = 6,
  FAS_STATUS_NUMERICAL = 7,
  FAS_STATUS_PANIC = 8,
} FasStatus;

/**
 * Opaque port configuration.
 */
typedef struct FasConfigHandle FasConfigHandle;

/**
 * Opaque correlation profile.
 */
typedef struct FasProfileHandle FasProfileHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *fas_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fas_version(void);

/**
 * # Safety
 * `out_config` must be a valid pointer to write a handle into.
 */
enum FasStatus fas_config_new(size_t n_ports,
                              double size_wavelengths,
                              double snr_ratio,
                              struct FasConfigHandle **out_config);

/**
 * As [`fas_config_new`] with the threshold ratio in dB.
 *
 * # Safety
 * `out_config` must be a valid pointer to write a handle into.
 */
enum FasStatus fas_config_from_db(size_t n_ports,
                                  double size_wavelengths,
                                  double snr_ratio_db,
                                  struct FasConfigHandle **out_config);

/**
 * # Safety
 * `config` must come from `fas_config_new`/`fas_config_from_db` and not be
 * used afterwards. Null is ignored.
 */
void fas_config_free(struct FasConfigHandle *config);

/**
 * # Safety
 * `config` must be a live handle; `out_ratio` writable.
 */
enum FasStatus fas_config_snr_ratio(const struct FasConfigHandle *config, double *out_ratio);

/**
 * Correlation profile of an evenly spaced configuration.
 *
 * # Safety
 * `config` must be a live handle; `out_profile` writable.
 */
enum FasStatus fas_profile_from_config(const struct FasConfigHandle *config,
                                       struct FasProfileHandle **out_profile);

/**
 * Profile from explicit correlations; `mu[0]` must be 0.
 *
 * # Safety
 * `mu` must point to `len` readable doubles; `out_profile` writable.
 */
enum FasStatus fas_profile_from_mu(const double *mu,
                                   size_t len,
                                   struct FasProfileHandle **out_profile);

/**
 * # Safety
 * `profile` must come from a `fas_profile_*` constructor and not be used
 * afterwards. Null is ignored.
 */
void fas_profile_free(struct FasProfileHandle *profile);

/**
 * Number of ports in `profile`.
 *
 * # Safety
 * `profile` must be a live handle; `out_len` writable.
 */
enum FasStatus fas_profile_len(const struct FasProfileHandle *profile, size_t *out_len);

/**
 * Copy up to `cap` correlations into `buf`.
 *
 * # Safety
 * `profile` must be a live handle and `buf` must have room for `cap` doubles.
 */
enum FasStatus fas_profile_mu(const struct FasProfileHandle *profile, double *buf, size_t cap);

/**
 * # Safety
 * `config` must be a live handle; `out_p` writable.
 */
enum FasStatus fas_outage_exact(const struct FasConfigHandle *config, double *out_p);

/**
 * Exact outage for an arbitrary profile at linear threshold ratio `x`.
 *
 * # Safety
 * `profile` must be a live handle; `out_p` writable.
 */
enum FasStatus fas_outage_exact_profile(const struct FasProfileHandle *profile,
                                        double x,
                                        double *out_p);

/**
 * Closed-form approximation; may be negative for many ports.
 *
 * # Safety
 * `config` must be a live handle; `out_p` writable.
 */
enum FasStatus fas_outage_approx(const struct FasConfigHandle *config, double *out_p);

/**
 * Upper bound with parameter `kappa > 1`.
 *
 * # Safety
 * `config` must be a live handle; `out_p` writable.
 */
enum FasStatus fas_outage_upper_bound(const struct FasConfigHandle *config,
                                      double kappa,
                                      double *out_p);

/**
 * # Safety
 * `profile` must be a live handle; `out_p` writable.
 */
enum FasStatus fas_outage_upper_bound_profile(const struct FasProfileHandle *profile,
                                              double x,
                                              double kappa,
                                              double *out_p);

/**
 * Outage of `branches`-branch MRC at linear threshold ratio `x`.
 *
 * # Safety
 * `out_p` must be writable.
 */
enum FasStatus fas_outage_mrc(size_t branches, double x, double *out_p);

/**
 * Seeded MC estimate of selection outage and its 95% half width.
 *
 * # Safety
 * `config` must be a live handle; both out pointers writable.
 */
enum FasStatus fas_mc_outage(const struct FasConfigHandle *config,
                             uint64_t trials,
                             uint64_t seed,
                             size_t workers,
                             double *out_p_hat,
                             double *out_half_width);

/**
 * First-order Marcum Q-function.
 *
 * # Safety
 * `out_q` must be writable.
 */
enum FasStatus fas_marcum_q1(double a, double b, double *out_q);

/**
 * Bessel function of the first kind, order zero.
 *
 * # Safety
 * `out_j0` must be writable.
 */
enum FasStatus fas_bessel_j0(double x, double *out_j0);

/**
 * Minimum size in wavelengths for `n_ports >= 4` ports to beat
 * `branches`-branch MRC under the bound. An infeasible query still returns
 * `FAS_STATUS_OK` with `*out_feasible = false` and `*out_size` set to NaN.
 *
 * # Safety
 * Both out pointers must be writable.
 */
enum FasStatus fas_min_size(size_t branches,
                            double x,
                            double kappa,
                            size_t n_ports,
                            double *out_size,
                            bool *out_feasible);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FAS_H */
