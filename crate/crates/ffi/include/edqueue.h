#ifndef EDQUEUE_H
#define EDQUEUE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EdqStatus {
  EDQ_STATUS_OK = 0,
  EDQ_STATUS_NULL_ARGUMENT = 1,
  EDQ_STATUS_INVALID_CONFIG = 2,
  EDQ_STATUS_INVALID_ARGUMENT = 3,
  EDQ_STATUS_EMPTY_DATA = 4,
  EDQ_STATUS_FIT_FAILED = 5,
  EDQ_STATUS_BUFFER_TOO_SMALL = 6,
  EDQ_STATUS_PANIC = 99,
} EdqStatus;

typedef enum EdqModel {
  EDQ_MODEL_LOGNORMAL = 0,
  EDQ_MODEL_PLCUTOFF_ALPHA1 = 1,
  EDQ_MODEL_PLCUTOFF_ALPHA1_5 = 2,
} EdqModel;

typedef struct EdqConfig EdqConfig;

typedef struct EdqFit EdqFit;

typedef struct EdqHistogram EdqHistogram;

typedef struct EdqTrace EdqTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failing call on this thread. Never NULL; valid
// until the next failing call.
const char *edq_last_error(void);

// Creates a configuration with default values.
//
// # Safety
// `out` must be a valid pointer.
enum EdqStatus edq_config_new(struct EdqConfig **out);

// Parses `key = value` configuration text (NUL-terminated UTF-8).
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum EdqStatus edq_config_parse(const char *text, struct EdqConfig **out);

// Offered load `lambda / mu` of a configuration.
//
// # Safety
// `config` must be a live handle and `out` a valid pointer.
enum EdqStatus edq_config_traffic_intensity(const struct EdqConfig *config, double *out);

// # Safety
// `config` must be NULL or a handle not yet freed.
void edq_config_free(struct EdqConfig *config);

// Runs the queue model.
//
// # Safety
// `config` must be a live handle and `out` a valid pointer.
enum EdqStatus edq_simulate(const struct EdqConfig *config, struct EdqTrace **out);

// Counts of accepted, rejected and still-queued manuscripts. Any output
// pointer may be NULL.
//
// # Safety
// `trace` must be a live handle; non-NULL outputs must be valid.
enum EdqStatus edq_trace_counts(const struct EdqTrace *trace,
                                size_t *accepted,
                                size_t *rejected,
                                size_t *in_queue);

// Waiting times of accepted manuscripts, in acceptance order. Warm-up
// meetings are skipped unless `include_warmup` is non-zero.
//
// # Safety
// `trace` must be a live handle, `len` valid, `buf` NULL or `cap` long.
enum EdqStatus edq_trace_waiting_times(const struct EdqTrace *trace,
                                       int32_t include_warmup,
                                       double *buf,
                                       size_t cap,
                                       size_t *len);

// # Safety
// `trace` must be NULL or a handle not yet freed.
void edq_trace_free(struct EdqTrace *trace);

// Normalized histogram with bins `[0, w), [w, 2w), ...` covering the sample.
//
// # Safety
// `values` must point to `n` doubles and `out` must be valid.
enum EdqStatus edq_histogram_linear(const double *values,
                                    size_t n,
                                    double width,
                                    struct EdqHistogram **out);

// # Safety
// `hist` must be a live handle and `out` valid.
enum EdqStatus edq_histogram_n_bins(const struct EdqHistogram *hist, size_t *out);

// Edges, count and density of bin `i`. Any output pointer may be NULL.
//
// # Safety
// `hist` must be a live handle; non-NULL outputs must be valid.
enum EdqStatus edq_histogram_bin(const struct EdqHistogram *hist,
                                 size_t i,
                                 double *left,
                                 double *right,
                                 uint64_t *count,
                                 double *density);

// # Safety
// `hist` must be NULL or a handle not yet freed.
void edq_histogram_free(struct EdqHistogram *hist);

// Least-squares fit of `model` to the histogram's non-empty bins, starting
// from moment-based guesses.
//
// # Safety
// `hist` must be a live handle and `out` valid.
enum EdqStatus edq_fit(const struct EdqHistogram *hist, enum EdqModel model, struct EdqFit **out);

// Fitted parameters. Log-normal: `p0, A, t_c, varpi`. Cutoff power law:
// `A, alpha, t0`.
//
// # Safety
// `fit` must be a live handle, `len` valid, `buf` NULL or `cap` long.
enum EdqStatus edq_fit_params(const struct EdqFit *fit, double *buf, size_t cap, size_t *len);

// Fit quality. `r_squared` is NaN when undefined (all densities equal).
// Any output pointer may be NULL.
//
// # Safety
// `fit` must be a live handle; non-NULL outputs must be valid.
enum EdqStatus edq_fit_quality(const struct EdqFit *fit,
                               double *sse,
                               double *r_squared,
                               int32_t *converged);

// # Safety
// `fit` must be NULL or a handle not yet freed.
void edq_fit_free(struct EdqFit *fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EDQUEUE_H */
