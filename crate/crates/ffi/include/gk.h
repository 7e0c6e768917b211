#ifndef GK_H
#define GK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Field of a problem instance.
typedef enum GkField {
  GK_FIELD_REAL = 0,
  GK_FIELD_COMPLEX = 1,
} GkField;

typedef enum GkStatus {
  GK_STATUS_OK = 0,
  GK_STATUS_NULL_POINTER = 1,
  GK_STATUS_INVALID_ARGUMENT = 2,
  GK_STATUS_DOMAIN = 3,
  GK_STATUS_DIMENSION_MISMATCH = 4,
  GK_STATUS_BUDGET = 5,
  GK_STATUS_INSUFFICIENT_ORDER = 6,
  GK_STATUS_NUMERICAL = 7,
  GK_STATUS_INVALID_UTF8 = 8,
  GK_STATUS_PANIC = 9,
} GkStatus;

// Opaque matrix instance.
typedef struct GkInstance GkInstance;

// Opaque inverse series of the Haagerup function.
typedef struct GkSeries GkSeries;

typedef struct GkConstants {
  double k_real;
  double c_arcsinh1;
  double x0;
  double c0;
  double k_complex;
  double davie_real;
  double davie_complex;
} GkConstants;

typedef struct GkRoundSummary {
  double relaxation_value;
  double expected_mean;
  double mean_value;
  double std_error;
  double best_value;
  double clip_magnitude;
  // 1 when the 5σ expectation check and the discrete check pass.
  int32_t ok;
} GkRoundSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread ("" after a success).
// Valid until the next gk call on the same thread.
const char *gk_last_error(void);

// Library version, a static string.
const char *gk_version(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void gk_string_free(char *s);

// Fills `out` with the constants and Davie bounds (the first call takes
// a few hundred milliseconds; later calls are cached).
//
// # Safety
// `out` must point to writable memory for one `GkConstants`.
enum GkStatus gk_constants(struct GkConstants *out);

// `h(x)` for `|x| ≤ 1`.
//
// # Safety
// `out` must be writable.
enum GkStatus gk_haagerup_h(double x, double *out);

// Inverse series of `h` with `order` odd coefficients (at least 1).
//
// # Safety
// `out` must be writable; the handle is released with `gk_series_free`.
enum GkStatus gk_h_inverse_new(uintptr_t order, struct GkSeries **out);

// # Safety
// `s` must be null or a live handle from `gk_h_inverse_new`.
void gk_series_free(struct GkSeries *s);

// # Safety
// `s` must be a live handle; `out` must be writable.
enum GkStatus gk_series_order(const struct GkSeries *s, uintptr_t *out);

// Coefficient of `x^(2k+1)` and its error estimate (`error` may be null).
//
// # Safety
// `s` must be a live handle; `value` must be writable.
enum GkStatus gk_series_coeff(const struct GkSeries *s, uintptr_t k, double *value, double *error);

// Sum of the series at `x`, `|x| ≤ 1`.
//
// # Safety
// `s` must be a live handle; `out` must be writable.
enum GkStatus gk_series_eval(const struct GkSeries *s, double x, double *out);

// Real `m × n` instance from `m*n` row-major entries.
//
// # Safety
// `entries` must hold `m*n` doubles; `out` must be writable.
enum GkStatus gk_instance_new_real(uintptr_t m,
                                   uintptr_t n,
                                   const double *entries,
                                   struct GkInstance **out);

// Complex `m × n` instance from `2*m*n` doubles: row-major `(re, im)` pairs.
//
// # Safety
// `re_im` must hold `2*m*n` doubles; `out` must be writable.
enum GkStatus gk_instance_new_complex(uintptr_t m,
                                      uintptr_t n,
                                      const double *re_im,
                                      struct GkInstance **out);

// Instance from the JSON instance format.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum GkStatus gk_instance_from_json(const char *json, struct GkInstance **out);

// # Safety
// `p` must be null or a live instance handle.
void gk_instance_free(struct GkInstance *p);

// # Safety
// `p` must be a live handle; `m`, `n` and `field` may each be null.
enum GkStatus gk_instance_shape(const struct GkInstance *p,
                                uintptr_t *m,
                                uintptr_t *n,
                                enum GkField *field);

// Discrete optimum: exact for real instances (up to 30 columns), phase
// grid or multistart for complex ones.
//
// # Safety
// `p` must be a live handle; `value` must be writable.
enum GkStatus gk_discrete_opt(const struct GkInstance *p,
                              uintptr_t starts,
                              uint64_t seed,
                              double *value);

// Best unit-vector relaxation value over `starts` seeded starts.
//
// # Safety
// `p` must be a live handle; `value` must be writable.
enum GkStatus gk_relaxation_opt(const struct GkInstance *p,
                                uintptr_t starts,
                                uint64_t seed,
                                double *value);

// Relaxation, embedding and Gaussian sign rounding with `samples` draws.
//
// # Safety
// `p` must be a live handle; `out` must be writable.
enum GkStatus gk_round(const struct GkInstance *p,
                       uintptr_t samples,
                       uintptr_t starts,
                       uint64_t seed,
                       struct GkRoundSummary *out);

// Full solve report (discrete, relaxation and ratio) as JSON.
//
// # Safety
// `p` must be a live handle; `out` must be writable. Free the string with
// `gk_string_free`.
enum GkStatus gk_solve_json(const struct GkInstance *p,
                            uintptr_t starts,
                            uint64_t seed,
                            char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GK_H */
