#ifndef VOROTENS_H
#define VOROTENS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Moment integration backend.
 */
typedef enum VtMethod {
  VT_METHOD_EXACT = 0,
  VT_METHOD_MONTE_CARLO = 1,
} VtMethod;

/**
 * Which measures feed which Steiner system.
 */
typedef enum VtMode {
  VT_MODE_STANDARD = 0,
  VT_MODE_REFINED = 1,
  VT_MODE_SHELL = 2,
  VT_MODE_REDUCED = 3,
} VtMode;

/**
 * Result of every fallible call.
 */
typedef enum VtStatus {
  VT_STATUS_OK = 0,
  VT_STATUS_INVALID_INPUT = 1,
  VT_STATUS_DIMENSION_MISMATCH = 2,
  VT_STATUS_PRECONDITION = 3,
  VT_STATUS_UNSUPPORTED = 4,
  VT_STATUS_NUMERICAL = 5,
  VT_STATUS_IO = 6,
  VT_STATUS_NULL_POINTER = 7,
  VT_STATUS_PANIC = 8,
} VtStatus;

/**
 * Opaque estimate `Φ̂_k` for the orders `k` of one Steiner system.
 */
typedef struct VtEstimate VtEstimate;

/**
 * Opaque point sample.
 */
typedef struct VtSample VtSample;

/**
 * Estimation options; start from [`vt_options_default`].
 */
typedef struct VtOptions {
  uint32_t r;
  uint32_t s;
  /**
   * Strictly increasing radii; `d + 1` of them in standard and refined
   * mode, `d` otherwise.
   */
  const double *radii;
  size_t n_radii;
  enum VtMethod method;
  uint32_t max_degree;
  size_t mc_samples;
  uint64_t seed;
  enum VtMode mode;
  /**
   * Nonzero to accept extra radii and solve in the least-squares sense.
   */
  uint8_t least_squares;
} VtOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *vt_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *vt_version(void);

/**
 * Sample from `n` points of dimension `dim` stored row by row in
 * `coords`. Pass `spacing > 0` to tag the points as a subset of the cubic
 * lattice `spacing · Z^dim`, or `0` for an unstructured sample.
 *
 * # Safety
 * `coords` must point to `n * dim` readable doubles; `out` must be valid
 * for writing.
 */
enum VtStatus vt_sample_new(size_t dim,
                            const double *coords,
                            size_t n,
                            double spacing,
                            struct VtSample **out);

/**
 * Digitize a reference shape given as JSON on the lattice `a · Z^d`.
 *
 * # Safety
 * `shape_json` must be a NUL-terminated string; `out` must be valid for
 * writing.
 */
enum VtStatus vt_sample_digitize(const char *shape_json, double a, struct VtSample **out);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `sample` must be null or a live handle.
 */
size_t vt_sample_len(const struct VtSample *sample);

/**
 * Dimension, or 0 for a null handle.
 *
 * # Safety
 * `sample` must be null or a live handle.
 */
size_t vt_sample_dim(const struct VtSample *sample);

/**
 * # Safety
 * `sample` must be null or a handle not yet freed.
 */
void vt_sample_free(struct VtSample *sample);

/**
 * Defaults: `r = s = 0`, no radii, exact moments up to degree 4,
 * standard mode.
 */
struct VtOptions vt_options_default(void);

/**
 * Estimate `Φ_k^{r,s}` over the whole space.
 *
 * # Safety
 * `sample` and `options` must be live; `options.radii` must point to
 * `options.n_radii` doubles; `out` must be valid for writing.
 */
enum VtStatus vt_estimate(const struct VtSample *sample,
                          const struct VtOptions *options,
                          struct VtEstimate **out);

/**
 * Coefficients of `Φ̂_k` in canonical multi-index order. Writes at most
 * `cap` values to `buf` and the full count to `len`; pass `cap = 0` to
 * query the count.
 *
 * # Safety
 * `est` must be live; `buf` must hold `cap` doubles; `len` must be valid
 * for writing.
 */
enum VtStatus vt_estimate_coeffs(const struct VtEstimate *est,
                                 size_t k,
                                 double *buf,
                                 size_t cap,
                                 size_t *len);

/**
 * Condition number of the Steiner matrix, or NaN for a null handle.
 *
 * # Safety
 * `est` must be null or a live handle.
 */
double vt_estimate_condition(const struct VtEstimate *est);

/**
 * The estimate as a JSON string (free with [`vt_string_free`]), or null on
 * failure.
 *
 * # Safety
 * `est` must be null or a live handle.
 */
char *vt_estimate_to_json(const struct VtEstimate *est);

/**
 * # Safety
 * `est` must be null or a handle not yet freed.
 */
void vt_estimate_free(struct VtEstimate *est);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void vt_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VOROTENS_H */
