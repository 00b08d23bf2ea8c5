#ifndef ORDRANK_H
#define ORDRANK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OrdrankStatus {
  ORDRANK_STATUS_OK = 0,
  ORDRANK_STATUS_NULL_POINTER = 1,
  ORDRANK_STATUS_INVALID_ARGUMENT = 2,
  ORDRANK_STATUS_INVALID_PATTERN = 3,
  ORDRANK_STATUS_DOMAIN = 4,
  ORDRANK_STATUS_PARSE = 5,
  ORDRANK_STATUS_CONVERGENCE = 6,
  ORDRANK_STATUS_BUFFER_TOO_SMALL = 7,
  ORDRANK_STATUS_PANIC = 8,
} OrdrankStatus;

// Opaque model handle.
typedef struct OrdrankModel OrdrankModel;

typedef struct OrdrankMoments {
  double mean;
  double variance;
  // `INFINITY` for a deterministic outcome.
  double snr;
} OrdrankMoments;

typedef struct OrdrankRates {
  double ordinal;
  double binary;
  // 0 when no L₀ estimate exists.
  uint64_t predicted_l0;
  bool converged;
} OrdrankRates;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *ordrank_last_error(void);

// Builds a model from the JSON descriptor
// `{"link": {"kind": ..., "scale": ...}, "pattern": {"K": ..., "weights"|"psi": [...]}}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum OrdrankStatus ordrank_model_new_from_json(const char *json, struct OrdrankModel **out);

// Builds a model from mini-language specs, e.g. `"identity"` and `"abs:0.1"`.
// `k = 0` takes K from a `,K=<n>` suffix of the pattern.
//
// # Safety
// `link` and `pattern` must be NUL-terminated strings; `out` must be writable.
enum OrdrankStatus ordrank_model_new(const char *link,
                                     const char *pattern,
                                     size_t k,
                                     struct OrdrankModel **out);

// Releases a model; null is ignored.
//
// # Safety
// `model` must come from `ordrank_model_new*` and not be freed twice.
void ordrank_model_free(struct OrdrankModel *model);

// K of the model, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t ordrank_model_k(const struct OrdrankModel *model);

// Writes the 2K probabilities of outcomes −K..−1, 1..K.
//
// # Safety
// `model` must be a live handle; `out` must hold `len` doubles.
enum OrdrankStatus ordrank_model_pmf(const struct OrdrankModel *model,
                                     double gamma,
                                     double *out,
                                     size_t len);

// # Safety
// `model` must be a live handle; `out` must be writable.
enum OrdrankStatus ordrank_model_prob_positive(const struct OrdrankModel *model,
                                               double gamma,
                                               double *out);

// # Safety
// `model` must be a live handle; `out` must be writable.
enum OrdrankStatus ordrank_model_moments(const struct OrdrankModel *model,
                                         double gamma,
                                         struct OrdrankMoments *out);

// Draws `count` outcomes; the same seed always yields the same draws.
//
// # Safety
// `model` must be a live handle; `out` must hold `count` ints.
enum OrdrankStatus ordrank_model_sample(const struct OrdrankModel *model,
                                        double gamma,
                                        uint64_t seed,
                                        int32_t *out,
                                        size_t count);

// SNR of the model's magnitude distribution (`INFINITY` if degenerate).
//
// # Safety
// `model` must be a live handle; `out` must be writable.
enum OrdrankStatus ordrank_model_snr(const struct OrdrankModel *model, double *out);

// Minimal SNR over patterns on {1..K} (non-increasing ones if `monotone`).
// `weights` may be null; otherwise it receives the K optimal weights.
//
// # Safety
// `value` must be writable; `weights`, if non-null, must hold `len` doubles.
enum OrdrankStatus ordrank_minimal_snr(size_t k,
                                       bool monotone,
                                       double *value,
                                       double *weights,
                                       size_t len);

// Rate functions at zero for ordinal and binarized two-item data, plus the
// heuristic L₀ at the given error-ratio `factor`.
//
// # Safety
// `model` must be a live handle; `out` must be writable.
enum OrdrankStatus ordrank_model_rates(const struct OrdrankModel *model,
                                       double gamma,
                                       double factor,
                                       struct OrdrankRates *out);

// Fraction of item pairs ordered differently by `scores` and `theta`
// (score ties count as errors).
//
// # Safety
// `scores` and `theta` must hold `n` doubles; `out` must be writable.
enum OrdrankStatus ordrank_kendall_tau(const double *scores,
                                       const double *theta,
                                       size_t n,
                                       double *out);

// Library version as a static NUL-terminated string.
const char *ordrank_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORDRANK_H */
