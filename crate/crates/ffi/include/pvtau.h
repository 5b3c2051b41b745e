#ifndef PVTAU_H
#define PVTAU_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the names match the error codes of the command-line tool.
 */
typedef enum {
  PV_OK = 0,
  PV_E_NULL_POINTER = 1,
  PV_E_INVALID_ARGUMENT = 2,
  PV_E_PANIC = 3,
  PV_E_POLE = 10,
  PV_E_G_ZERO = 11,
  PV_E_G_HAT_SINGULAR = 12,
  PV_E_COEFF_POLE = 13,
  PV_E_RESONANCE = 14,
  PV_E_NON_INVERTIBLE = 15,
  PV_E_DEPTH = 16,
  PV_E_CANCELLATION = 17,
  PV_E_GK_ORDER = 18,
  PV_E_GENERICITY = 19,
  PV_E_SERIES_MARGIN = 20,
  PV_E_POLE_PROXIMITY = 21,
  PV_E_RESIDUAL_DRIFT = 22,
  PV_E_ORDER = 23,
  PV_E_CONFIG = 24,
  PV_E_IO = 25,
} PvStatus;

typedef enum {
  PV_CHANNEL_ZERO = 0,
  PV_CHANNEL_I_INFINITY = 1,
  PV_CHANNEL_PLUS_INFINITY = 2,
} PvChannel;

typedef enum {
  PV_RAY_POSITIVE_REAL = 0,
  PV_RAY_POSITIVE_IMAGINARY = 1,
} PvRay;

/**
 * Exponents (θ₀, θ_t, θ_*) at c = 1.
 */
typedef struct PvParams PvParams;

/**
 * A tau-function expansion around one of 0, i∞, +∞.
 */
typedef struct PvTauSeries PvTauSeries;

typedef struct {
  double re;
  double im;
} PvComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; valid until the next failing call.
 */
const char *pv_last_error(void);

/**
 * Machine-readable name of a status, e.g. `"E_RESONANCE"`.
 */
const char *pv_status_name(PvStatus status);

/**
 * # Safety
 * `out_params` must be valid for writes.
 */
PvStatus pv_params_new(PvComplex theta0,
                       PvComplex thetat,
                       PvComplex theta_star,
                       PvParams **out_params);

/**
 * # Safety
 * `params` must be null or a handle from [`pv_params_new`] not yet freed.
 */
void pv_params_free(PvParams *params);

/**
 * Builds the expansion of `channel` with label pair `(a, b)`: (σ, η), (ν, ρ) or (ω, ξ).
 *
 * # Safety
 * `params` must be a live handle; `out_series` must be valid for writes.
 */
PvStatus pv_series_new(const PvParams *params,
                       PvChannel channel,
                       PvComplex a,
                       PvComplex b,
                       size_t order,
                       size_t window,
                       PvTauSeries **out_series);

/**
 * # Safety
 * `series` must be null or a handle from [`pv_series_new`] not yet freed.
 */
void pv_series_free(PvTauSeries *series);

/**
 * # Safety
 * `series` must be a live handle; `out_log_tau` must be valid for writes.
 */
PvStatus pv_series_log_tau(const PvTauSeries *series, PvComplex t, PvComplex *out_log_tau);

/**
 * Writes (H, dH/dt, d²H/dt²) to `out_h[0..3]`.
 *
 * # Safety
 * `series` must be a live handle; `out_h` must point to three writable values.
 */
PvStatus pv_series_hamiltonian(const PvTauSeries *series, PvComplex t, PvComplex *out_h);

/**
 * log τ from the Fredholm determinant; `normalized` rescales it to the t → 0 series convention.
 *
 * # Safety
 * `params` must be a live handle; `out_log_tau` must be valid for writes.
 */
PvStatus pv_log_tau_fredholm(const PvParams *params,
                             PvComplex t,
                             PvComplex sigma,
                             PvComplex eta,
                             size_t modes,
                             bool normalized,
                             PvComplex *out_log_tau);

/**
 * # Safety
 * `params` must be a live handle; the out pointers must be valid for writes.
 */
PvStatus pv_monodromy_from_sigma_eta(const PvParams *params,
                                     PvComplex sigma,
                                     PvComplex eta,
                                     PvComplex *out_xplus,
                                     PvComplex *out_xminus);

/**
 * Inverse of [`pv_monodromy_from_sigma_eta`], with σ reduced to the canonical strip.
 *
 * # Safety
 * `params` must be a live handle; the out pointers must be valid for writes.
 */
PvStatus pv_sigma_eta_from_monodromy(const PvParams *params,
                                     PvComplex xplus,
                                     PvComplex xminus,
                                     PvComplex *out_sigma,
                                     PvComplex *out_eta);

/**
 * log Υ_{0→i∞} for the solution with short-distance labels (σ, η).
 *
 * # Safety
 * `params` must be a live handle; `out_log` must be valid for writes.
 */
PvStatus pv_log_upsilon_0_iinf(const PvParams *params,
                               PvComplex sigma,
                               PvComplex eta,
                               PvComplex *out_log);

/**
 * log Υ_{i∞→+∞}(ν, ω).
 *
 * # Safety
 * `out_log` must be valid for writes.
 */
PvStatus pv_log_upsilon_iinf_pinf(PvComplex nu, PvComplex omega, PvComplex *out_log);

/**
 * Principal log G(1+z) of the Barnes G-function.
 *
 * # Safety
 * `out_log` must be valid for writes.
 */
PvStatus pv_log_barnes_g1p(PvComplex z, PvComplex *out_log);

/**
 * Integrates σ-PV from the (σ, η) series along `ray` to `radius` and writes the
 * deviation |log(Υ·τ_asymptotic) − log τ_ode| there.
 *
 * # Safety
 * `params` must be a live handle; `out_deviation` must be valid for writes.
 */
PvStatus pv_verify_ray(const PvParams *params,
                       PvComplex sigma,
                       PvComplex eta,
                       PvRay ray,
                       size_t order,
                       size_t window,
                       double radius,
                       double *out_deviation);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PVTAU_H */
