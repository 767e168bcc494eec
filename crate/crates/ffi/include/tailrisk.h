#ifndef TAILRISK_H
#define TAILRISK_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define TR_OK 0

#define TR_ERR_NULL_POINTER 1

#define TR_ERR_DOMAIN 2

#define TR_ERR_PARAMETER 3

#define TR_ERR_INPUT 4

#define TR_ERR_MGF_NONEXISTENT 5

#define TR_ERR_UNSUPPORTED_GENERATOR 6

#define TR_ERR_DIFFERENTIABILITY 7

#define TR_ERR_RANGE 8

#define TR_ERR_INFEASIBLE 9

#define TR_ERR_NO_ROOT 10

#define TR_ERR_CONVERGENCE 11

#define TR_ERR_PARSE 12

#define TR_ERR_INTERNAL 13

#define TR_ERR_PANIC 14

#define TR_ERR_UTF8 15

// Symmetric location-scale model.
typedef struct TrModel TrModel;

// Scenario sample.
typedef struct TrSample TrSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *tr_version(void);

// Copy the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length in bytes.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t tr_last_error_message(char *buf, size_t len);

// Parse a model such as `normal(0,1)`, `t(5,0,1)` or `logistic(0,1)`.
//
// # Safety
// `spec` must be a NUL-terminated string and `out` valid for one write.
int32_t tr_model_parse(const char *spec, struct TrModel **out);

// # Safety
// `model` must come from `tr_model_parse` and not be used afterwards.
void tr_model_free(struct TrModel *model);

// `VaR_alpha`.
//
// # Safety
// `model` must be a live handle and `out` valid for one write.
int32_t tr_model_var(const struct TrModel *model, double alpha, double *out);

// `CTE_alpha`.
//
// # Safety
// `model` must be a live handle and `out` valid for one write.
int32_t tr_model_cte(const struct TrModel *model, double alpha, double *out);

// Tail variance at level `alpha`.
//
// # Safety
// `model` must be a live handle and `out` valid for one write.
int32_t tr_model_tail_variance(const struct TrModel *model, double alpha, double *out);

// Tail quasi-linear mean for a utility such as `exp:0.5`, `pow:2`, `log`.
//
// # Safety
// `model` must be a live handle, `utility` NUL-terminated, `out` writable.
int32_t tr_model_tqlm(const struct TrModel *model, double alpha, const char *utility, double *out);

// Tail conditional entropic risk measure in closed form.
//
// # Safety
// `model` must be a live handle and `out` valid for one write.
int32_t tr_model_tcerm(const struct TrModel *model, double alpha, double gamma, double *out);

// Seeded sample of `n` draws.
//
// # Safety
// `model` must be a live handle and `out` valid for one write.
int32_t tr_model_sample(const struct TrModel *model,
                        size_t n,
                        uint64_t seed,
                        struct TrSample **out);

// Copy `len` finite values into a new sample.
//
// # Safety
// `values` must be valid for `len` reads and `out` for one write.
int32_t tr_sample_new(const double *values, size_t len, struct TrSample **out);

// # Safety
// `sample` must come from this library and not be used afterwards.
void tr_sample_free(struct TrSample *sample);

// Number of scenarios, 0 for a null handle.
//
// # Safety
// `sample` must be null or a live handle.
size_t tr_sample_len(const struct TrSample *sample);

// Empirical VaR; `out_se` may be null.
//
// # Safety
// `sample` must be a live handle, `out` writable, `out_se` null or writable.
int32_t tr_sample_var(const struct TrSample *sample, double alpha, double *out, double *out_se);

// Empirical CTE; `out_se` may be null.
//
// # Safety
// `sample` must be a live handle, `out` writable, `out_se` null or writable.
int32_t tr_sample_cte(const struct TrSample *sample, double alpha, double *out, double *out_se);

// Empirical tail quasi-linear mean; `out_se` may be null.
//
// # Safety
// `sample` must be a live handle, `utility` NUL-terminated, `out` writable,
// `out_se` null or writable.
int32_t tr_sample_tqlm(const struct TrSample *sample,
                       double alpha,
                       const char *utility,
                       double *out,
                       double *out_se);

// Stop-loss retention for a symmetric loss model.
//
// # Safety
// `model` must be a live handle and `out` valid for one write.
int32_t tr_retention_model(const struct TrModel *model,
                           double theta,
                           double budget,
                           double alpha,
                           double *out);

// Stop-loss retention for an empirical loss sample.
//
// # Safety
// `sample` must be a live handle and `out` valid for one write.
int32_t tr_retention_sample(const struct TrSample *sample,
                            double theta,
                            double budget,
                            double alpha,
                            double *out);

// Stop-loss retention for an exponential loss with the given rate.
//
// # Safety
// `out` must be valid for one write.
int32_t tr_retention_exponential(double rate,
                                 double theta,
                                 double budget,
                                 double alpha,
                                 double *out);

// Minimal-risk portfolio weights for `n` assets with location `mu` and
// row-major scale matrix `sigma` (`n * n` values). `generator` is
// `normal`, `logistic` or `t(m)`. Writes `n` weights, the root `r*`, and
// whether the weights agree with the brute-force minimizer (`out_agrees`
// may be null).
//
// # Safety
// `mu` must be valid for `n` reads, `sigma` for `n * n`, `out_weights`
// for `n` writes, `out_r` for one write; `out_agrees` null or writable.
int32_t tr_portfolio_min_risk(size_t n,
                              const double *mu,
                              const double *sigma,
                              const char *generator,
                              double alpha,
                              double gamma,
                              double *out_weights,
                              double *out_r,
                              bool *out_agrees);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TAILRISK_H */
