#ifndef MARKETFIELD_H
#define MARKETFIELD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. `MF_STATUS_OK` is zero.
 */
typedef enum MfStatus {
  MF_STATUS_OK = 0,
  MF_STATUS_NULL_POINTER = 1,
  MF_STATUS_INVALID_PARAMETER = 2,
  MF_STATUS_ZERO_RADIUS = 3,
  MF_STATUS_OUT_OF_DOMAIN = 4,
  MF_STATUS_INVALID_STEP = 5,
  MF_STATUS_BUFFER_TOO_SMALL = 6,
  MF_STATUS_UNKNOWN_KEY = 7,
  MF_STATUS_INTERNAL = 8,
  MF_STATUS_PANIC = 9,
} MfStatus;

/**
 * Reconstructed choice curve.
 */
typedef struct MfCurve MfCurve;

/**
 * Sampled figure grid.
 */
typedef struct MfFigure MfFigure;

/**
 * Soliton parameters.
 */
typedef struct MfParams MfParams;

/**
 * Torsion callback: `tau(s, user_data)`.
 */
typedef double (*MfTorsionFn)(double, void*);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *mf_status_message(enum MfStatus status);

/**
 * Message of the last failure on this thread. Valid until the next failing
 * call on the same thread; empty when nothing failed yet.
 */
const char *mf_last_error_message(void);

/**
 * Creates parameters with the given β and τ and default remaining fields.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum MfStatus mf_params_new(double beta, double tau, struct MfParams **out);

/**
 * Sets one parameter by name: `beta`, `tau`, `l_scale`, `L`, `activity`,
 * `gamma` or `d`. The change is rejected if it makes the set invalid.
 *
 * # Safety
 * `params` must come from [`mf_params_new`]; `key` must be a NUL-terminated string.
 */
enum MfStatus mf_params_set(struct MfParams *params, const char *key, double value);

/**
 * # Safety
 * `params` must come from [`mf_params_new`] or be null.
 */
void mf_params_free(struct MfParams *params);

/**
 * Curvature `κ(s, t)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfStatus mf_curvature(const struct MfParams *params, double s, double t, double *out);

/**
 * Hasimoto field `ψ(s, t)` as real and imaginary parts.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfStatus mf_hasimoto_psi(const struct MfParams *params,
                              double s,
                              double t,
                              double *out_re,
                              double *out_im);

/**
 * Choice components `(c1, c2, c3)` into `out[0..3]`.
 *
 * # Safety
 * `out` must point to three writable doubles.
 */
enum MfStatus mf_choice_components(const struct MfParams *params, double s, double t, double *out);

/**
 * Derived fields `(θ3, c3, p3)` at arclength `arc`, time `t` and transverse
 * position `(x1, x2)` into `out[0..3]`.
 *
 * # Safety
 * `out` must point to three writable doubles.
 */
enum MfStatus mf_derived_fields(const struct MfParams *params,
                                double arc,
                                double t,
                                double x1,
                                double x2,
                                double *out);

/**
 * Demand-circle radius for a choice value in `(0, 1]`.
 *
 * # Safety
 * `out` must be valid.
 */
enum MfStatus mf_demand_radius(double ch_mag, double a, double *out);

/**
 * Polarization rotation `∫₀^length τ(s) ds`.
 *
 * # Safety
 * `tau` must be safe to call with `user_data` from this thread.
 */
enum MfStatus mf_polarization_rotation(MfTorsionFn tau,
                                       void *user_data,
                                       double length,
                                       double *out);

/**
 * Integrates the Frenet system for the soliton at time `t` over
 * `[s_min, s_max]` and aligns it with the closed-form curve. The alignment
 * RMS is written to `out_rms` when non-null.
 *
 * # Safety
 * Pointers must be valid; `out_rms` may be null.
 */
enum MfStatus mf_curve_reconstruct(const struct MfParams *params,
                                   double t,
                                   double s_min,
                                   double s_max,
                                   double step,
                                   struct MfCurve **out,
                                   double *out_rms);

/**
 * Number of samples in a curve.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfStatus mf_curve_len(const struct MfCurve *curve, uintptr_t *out);

/**
 * Alignment RMS recorded at reconstruction.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfStatus mf_curve_rms(const struct MfCurve *curve, double *out);

/**
 * Copies positions as `x0 y0 z0 x1 …` into `buf` (`3 * len` doubles).
 *
 * # Safety
 * `buf` must hold `buf_len` writable doubles.
 */
enum MfStatus mf_curve_positions(const struct MfCurve *curve, double *buf, uintptr_t buf_len);

/**
 * # Safety
 * `curve` must come from [`mf_curve_reconstruct`] or be null.
 */
void mf_curve_free(struct MfCurve *curve);

/**
 * Samples figure `id` (1-8) on an `n_s × n_t` grid. Figures 6-8 use the
 * default transverse offsets.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfStatus mf_figure_sample(uint8_t id,
                               const struct MfParams *params,
                               double s_min,
                               double s_max,
                               uintptr_t n_s,
                               double t_min,
                               double t_max,
                               uintptr_t n_t,
                               struct MfFigure **out);

/**
 * Grid dimensions of a sampled figure.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfStatus mf_figure_dims(const struct MfFigure *fig, uintptr_t *n_s, uintptr_t *n_t);

/**
 * Copies values, `t` outer and `s` inner, into `buf`.
 *
 * # Safety
 * `buf` must hold `buf_len` writable doubles.
 */
enum MfStatus mf_figure_values(const struct MfFigure *fig, double *buf, uintptr_t buf_len);

/**
 * # Safety
 * `fig` must come from [`mf_figure_sample`] or be null.
 */
void mf_figure_free(struct MfFigure *fig);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MARKETFIELD_H */
