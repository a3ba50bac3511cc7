#ifndef RQMC_H
#define RQMC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum RqmcFactor {
  RQMC_FACTOR_CHOLESKY = 0,
  RQMC_FACTOR_OT = 1,
} RqmcFactor;

typedef enum RqmcPayoff {
  RQMC_PAYOFF_ASIAN_CALL = 0,
  RQMC_PAYOFF_ASIAN_DELTA = 1,
  RQMC_PAYOFF_ASIAN_GAMMA = 2,
  RQMC_PAYOFF_ASIAN_RHO = 3,
  RQMC_PAYOFF_ASIAN_THETA = 4,
  RQMC_PAYOFF_ASIAN_VEGA = 5,
  RQMC_PAYOFF_GEOMETRIC_INDICATOR = 6,
} RqmcPayoff;

typedef enum RqmcStatus {
  RQMC_STATUS_OK = 0,
  RQMC_STATUS_NULL_POINTER = 1,
  RQMC_STATUS_CAPACITY = 2,
  RQMC_STATUS_CONTRACT = 3,
  RQMC_STATUS_DOMAIN = 4,
  RQMC_STATUS_NOT_POSITIVE_DEFINITE = 5,
  RQMC_STATUS_TOLERANCE = 6,
  RQMC_STATUS_WORK_BUDGET = 7,
  RQMC_STATUS_INFEASIBLE = 8,
  RQMC_STATUS_INSUFFICIENT_DATA = 9,
  RQMC_STATUS_NON_FINITE = 10,
  RQMC_STATUS_ORACLE_UNAVAILABLE = 11,
  RQMC_STATUS_PARSE = 12,
  RQMC_STATUS_IO = 13,
  RQMC_STATUS_INVALID_UTF8 = 14,
  RQMC_STATUS_PANIC = 15,
} RqmcStatus;

// Opaque market model.
typedef struct RqmcModel RqmcModel;

// Opaque point set.
typedef struct RqmcPointSet RqmcPointSet;

// Message of the last failure on this thread; empty if none. Owned by the
// library.
const char *rqmc_last_error_message(void);

// First `2^m` points of the `d`-dimensional Sobol' sequence.
//
// # Safety
// `out` must be valid for a write.
enum RqmcStatus rqmc_points_generate(uint32_t m, size_t d, struct RqmcPointSet **out);

// Owen-scrambled copy of `points`.
//
// # Safety
// `points` must be a live handle; `out` must be valid for a write.
enum RqmcStatus rqmc_points_scramble(const struct RqmcPointSet *points,
                                     uint64_t master_seed,
                                     uint64_t replicate_index,
                                     struct RqmcPointSet **out);

// Number of points, or 0 for a null handle.
//
// # Safety
// `points` must be null or a live handle.
size_t rqmc_points_len(const struct RqmcPointSet *points);

// Dimension, or 0 for a null handle.
//
// # Safety
// `points` must be null or a live handle.
size_t rqmc_points_dim(const struct RqmcPointSet *points);

// Copy the row-major coordinates into `buf`, which holds `buf_len`
// doubles and must have room for `len * dim`.
//
// # Safety
// `points` must be a live handle; `buf` must be valid for `buf_len` writes.
enum RqmcStatus rqmc_points_copy(const struct RqmcPointSet *points, double *buf, size_t buf_len);

// # Safety
// `points` must be null or a handle not yet freed.
void rqmc_points_free(struct RqmcPointSet *points);

// Exhaustive (t,m,d)-net check in base `base`.
//
// # Safety
// `points` must be a live handle; `passed` must be valid for a write.
enum RqmcStatus rqmc_verify_net(const struct RqmcPointSet *points,
                                uint32_t base,
                                uint32_t t,
                                uint32_t m,
                                size_t d,
                                bool *passed);

// # Safety
// `out` must be valid for a write.
enum RqmcStatus rqmc_inv_norm_cdf(double p, double *out);

// # Safety
// `out` must be valid for a write.
enum RqmcStatus rqmc_theoretical_exponent(size_t d, size_t d_u, double max_a, double *out);

// # Safety
// `out` must be valid for a write.
enum RqmcStatus rqmc_model_new(double s0,
                               double r,
                               double sigma,
                               double maturity,
                               size_t steps,
                               double strike,
                               struct RqmcModel **out);

// # Safety
// `model` must be null or a handle not yet freed.
void rqmc_model_free(struct RqmcModel *model);

// Closed-form geometric-average Asian call price.
//
// # Safety
// `model` must be a live handle; `out` must be valid for a write.
enum RqmcStatus rqmc_geometric_asian_price(const struct RqmcModel *model, double *out);

// RQMC estimate of a payoff over `replicates` scramblings of `2^m`
// points.
//
// # Safety
// `model` must be a live handle; `estimate` and `std_error` must be valid
// for writes.
enum RqmcStatus rqmc_price(const struct RqmcModel *model,
                           enum RqmcPayoff payoff,
                           enum RqmcFactor factor,
                           uint32_t m,
                           size_t replicates,
                           uint64_t seed,
                           double *estimate,
                           double *std_error);

// Run a rate study from key-value config text. On success `*report_json`
// receives a string to release with [`rqmc_string_free`] and `*consistent`
// the verdict. `workers = 0` uses all cores.
//
// # Safety
// `config` must be a NUL-terminated string; the out-pointers must be valid
// for writes.
enum RqmcStatus rqmc_run_study(const char *config,
                               size_t workers,
                               char **report_json,
                               bool *consistent);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void rqmc_string_free(char *s);

#endif  /* RQMC_H */
