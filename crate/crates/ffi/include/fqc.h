#ifndef FQC_H
#define FQC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum FqcStatus {
  FQC_STATUS_OK = 0,
  FQC_STATUS_NULL_POINTER = 1,
  FQC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A size, enumeration, aliasing or budget guard refused the request.
   */
  FQC_STATUS_GUARD = 3,
  FQC_STATUS_PARSE = 4,
  FQC_STATUS_IO = 5,
  /**
   * Internal panic; the library state is unaffected but the call failed.
   */
  FQC_STATUS_PANIC = 6,
} FqcStatus;

/**
 * Finite complex-weighted discrete measure.
 */
typedef struct FqcMeasure FqcMeasure;

/**
 * Finite point set.
 */
typedef struct FqcPointSet FqcPointSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next failure.
 */
const char *fqc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fqc_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from a `char **` out-parameter of this library and not be freed twice.
 */
void fqc_string_free(char *s);

/**
 * Point set from `n` points stored row-major in `coords` (n·dim values) inside
 * the box `[lo, hi]`. Points closer than the default tolerance are merged.
 *
 * # Safety
 * `coords` holds `n·dim` values, `lo`/`hi` hold `dim` values, `out` is writable.
 */
enum FqcStatus fqc_pointset_new(uintptr_t dim,
                                const double *coords,
                                uintptr_t n,
                                const double *lo,
                                const double *hi,
                                struct FqcPointSet **out_set);

/**
 * Fibonacci chain in `[-half_width, half_width]`.
 *
 * # Safety
 * `out_set` is writable.
 */
enum FqcStatus fqc_pointset_fibonacci(double half_width, struct FqcPointSet **out_set);

/**
 * # Safety
 * `set` is NULL or a live handle that is not used afterwards.
 */
void fqc_pointset_free(struct FqcPointSet *set);

/**
 * # Safety
 * `set` is a live handle; `out_len` and `out_dim` are writable.
 */
enum FqcStatus fqc_pointset_shape(const struct FqcPointSet *set,
                                  uintptr_t *out_len,
                                  uintptr_t *out_dim);

/**
 * Copies up to `cap` coordinates (row-major, lexicographic order) into `buf`
 * and writes the full count to `out_total`.
 *
 * # Safety
 * `buf` has room for `cap` values; `out_total` is writable.
 */
enum FqcStatus fqc_pointset_coords(const struct FqcPointSet *set,
                                   double *buf,
                                   uintptr_t cap,
                                   uintptr_t *out_total);

/**
 * Minimum pairwise distance; +inf for fewer than two points.
 *
 * # Safety
 * `set` is a live handle; `out_distance` is writable.
 */
enum FqcStatus fqc_pointset_min_separation(const struct FqcPointSet *set, double *out_distance);

/**
 * JSON of the point set.
 *
 * # Safety
 * `set` is a live handle; `out_json` is writable.
 */
enum FqcStatus fqc_pointset_to_json(const struct FqcPointSet *set, char **out_json);

/**
 * Discreteness report (JSON) of the point set.
 *
 * # Safety
 * `set` is a live handle; `out_json` is writable.
 */
enum FqcStatus fqc_pointset_classify_json(const struct FqcPointSet *set, char **out_json);

/**
 * Unit-weight comb on a point set.
 *
 * # Safety
 * `set` is a live handle; `out_measure` is writable.
 */
enum FqcStatus fqc_measure_unit_comb(const struct FqcPointSet *set,
                                     struct FqcMeasure **out_measure);

/**
 * Measure with `n` atoms at row-major `positions` with weights `re + i·im`.
 * `im` may be NULL for real weights.
 *
 * # Safety
 * `positions` holds `n·dim` values, `re` (and `im` unless NULL) hold `n`, `lo`/`hi` hold `dim`.
 */
enum FqcStatus fqc_measure_new(uintptr_t dim,
                               const double *positions,
                               const double *re,
                               const double *im,
                               uintptr_t n,
                               const double *lo,
                               const double *hi,
                               struct FqcMeasure **out_measure);

/**
 * Weighted comb Σ φ̂(p2(γ)) δ_{p1(γ)} of the Fibonacci lattice with the
 * enumeration window `[window_lo, window_hi)`, over `[-half_width, half_width]`.
 * `window_function` uses the textual form, e.g. `"squared:bspline:2:0.45"`.
 *
 * # Safety
 * `window_function` is a NUL-terminated string; `out_measure` is writable.
 */
enum FqcStatus fqc_measure_fibonacci_model(const char *window_function,
                                           double window_lo,
                                           double window_hi,
                                           double half_width,
                                           struct FqcMeasure **out_measure);

/**
 * Predicted spectrum of the Fibonacci model measure on `[freq_lo, freq_hi]`,
 * dropping atoms below `min_weight` (pass 0 for the library default).
 *
 * # Safety
 * `window_function` is a NUL-terminated string; `out_measure` is writable.
 */
enum FqcStatus fqc_measure_fibonacci_spectrum(const char *window_function,
                                              double freq_lo,
                                              double freq_hi,
                                              double min_weight,
                                              struct FqcMeasure **out_measure);

/**
 * # Safety
 * `measure` is NULL or a live handle that is not used afterwards.
 */
void fqc_measure_free(struct FqcMeasure *measure);

/**
 * # Safety
 * `measure` is a live handle; `out_len` and `out_dim` are writable.
 */
enum FqcStatus fqc_measure_shape(const struct FqcMeasure *measure,
                                 uintptr_t *out_len,
                                 uintptr_t *out_dim);

/**
 * Exponential sum Σ w·exp(−2πi⟨x, t⟩) at one frequency `t` of length dim.
 *
 * # Safety
 * `measure` is a live handle; `t` holds `dim` values; outputs are writable.
 */
enum FqcStatus fqc_measure_transform_at(const struct FqcMeasure *measure,
                                        const double *t,
                                        uintptr_t dim,
                                        double *out_re,
                                        double *out_im);

/**
 * JSON of the measure.
 *
 * # Safety
 * `measure` is a live handle; `out_json` is writable.
 */
enum FqcStatus fqc_measure_to_json(const struct FqcMeasure *measure, char **out_json);

/**
 * Diffraction report (JSON) at truncation radius `r` on the grid `[lo, hi]`
 * with pitch at most `max_pitch` (0 selects 1/(8r)). Peaks are kept above
 * `relative_threshold` times the grid maximum.
 *
 * # Safety
 * `measure` is a live handle; `lo`/`hi` hold dim values; `out_json` is writable.
 */
enum FqcStatus fqc_diffraction_json(const struct FqcMeasure *measure,
                                    double r,
                                    const double *lo,
                                    const double *hi,
                                    double max_pitch,
                                    double relative_threshold,
                                    char **out_json);

/**
 * Comb-structure recovery of `measure` given its `spectrum`. Writes the
 * recovery JSON and sets `out_representable` to 1 or 0.
 *
 * # Safety
 * Both handles are live; outputs are writable.
 */
enum FqcStatus fqc_recover_json(const struct FqcMeasure *measure,
                                const struct FqcMeasure *spectrum,
                                int32_t *out_representable,
                                char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FQC_H */
