#ifndef EASENSE_H
#define EASENSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EasenseStatus {
  EASENSE_STATUS_OK = 0,
  EASENSE_STATUS_NULL_POINTER = 1,
  EASENSE_STATUS_INVALID_UTF8 = 2,
  EASENSE_STATUS_INVALID_INPUT = 3,
  EASENSE_STATUS_CONFIG = 4,
  EASENSE_STATUS_UNKNOWN_PROBLEM = 5,
  EASENSE_STATUS_CORRUPT_STORE = 6,
  EASENSE_STATUS_IO = 7,
  EASENSE_STATUS_DEGENERATE = 8,
  EASENSE_STATUS_UNSUPPORTED = 9,
  EASENSE_STATUS_BUFFER_TOO_SMALL = 10,
  EASENSE_STATUS_PANIC = 11,
} EasenseStatus;

// A benchmark problem.
typedef struct EasenseProblem EasenseProblem;

// Sensitivity indices of one (method, metric) analysis.
typedef struct EasenseReport EasenseReport;

// An experiment store opened for analysis.
typedef struct EasenseStore EasenseStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *easense_last_error(void);

// Library version as a static NUL-terminated string.
const char *easense_version(void);

// Looks up a benchmark problem by id (e.g. `"rastrigin_n10"`, `"dtlz2_m3_n10"`).
//
// # Safety
// `id` must be a valid C string and `out` a valid pointer.
enum EasenseStatus easense_problem_new(const char *id, struct EasenseProblem **out);

// # Safety
// `p` must come from `easense_problem_new` and not be used afterwards.
void easense_problem_free(struct EasenseProblem *p);

// Decision-space dimension and objective count.
//
// # Safety
// `p` must be a live problem handle; the out pointers must be valid.
enum EasenseStatus easense_problem_shape(const struct EasenseProblem *p,
                                         uintptr_t *dim,
                                         uintptr_t *n_obj);

// Evaluates `x` (length `dim`, clamped into the box) into `out` (capacity `out_len >= n_obj`).
//
// # Safety
// `x` must point to `x_len` doubles and `out` to `out_len` writable doubles.
enum EasenseStatus easense_problem_evaluate(const struct EasenseProblem *p,
                                            const double *x,
                                            uintptr_t x_len,
                                            double *out,
                                            uintptr_t out_len);

// Exact hypervolume of `count` points of dimension `m` (row-major) against `reference`.
//
// # Safety
// `points` must hold `count * m` doubles and `reference` `m` doubles.
enum EasenseStatus easense_hypervolume(const double *points,
                                       uintptr_t count,
                                       uintptr_t m,
                                       const double *reference,
                                       double *out);

// Runs or resumes the experiment in a TOML/JSON config file. `complete` is
// set to 1 when every cell is done and reports were written.
//
// # Safety
// `config_path` must be a valid C string; `complete` may be null.
enum EasenseStatus easense_run_experiment(const char *config_path, int32_t *complete);

// # Safety
// `dir` must be a valid C string and `out` a valid pointer.
enum EasenseStatus easense_store_open(const char *dir, struct EasenseStore **out);

// # Safety
// `s` must come from `easense_store_open` and not be used afterwards.
void easense_store_free(struct EasenseStore *s);

// Computes the report for `metric` (`"best"`, `"gd"`, `"igd"` or `"hv"`).
//
// # Safety
// `s` must be a live store handle; `metric` a valid C string; `out` valid.
enum EasenseStatus easense_store_report(const struct EasenseStore *s,
                                        const char *metric,
                                        struct EasenseReport **out);

// # Safety
// `r` must come from `easense_store_report` and not be used afterwards.
void easense_report_free(struct EasenseReport *r);

// Number of hyperparameters, or 0 for a null handle.
//
// # Safety
// `r` must be null or a live report handle.
uintptr_t easense_report_len(const struct EasenseReport *r);

// Copies the NUL-terminated name of parameter `i` into `buf`.
//
// # Safety
// `r` must be a live report handle and `buf` hold `buf_len` bytes.
enum EasenseStatus easense_report_param(const struct EasenseReport *r,
                                        uintptr_t i,
                                        char *buf,
                                        uintptr_t buf_len);

// Per-parameter values in parameter order: raw direct and interaction
// indices, their normalized forms, and 1-based ranks.
//
// # Safety
// `r` must be a live report handle; each non-null array must hold `len`
// elements. Null arrays are skipped.
enum EasenseStatus easense_report_values(const struct EasenseReport *r,
                                         double *direct,
                                         double *interaction,
                                         double *direct_norm,
                                         double *interaction_norm,
                                         uintptr_t *ranks,
                                         uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EASENSE_H */
