#ifndef WEAK_DISTILL_H
#define WEAK_DISTILL_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WdStatus {
  WD_STATUS_OK = 0,
  WD_STATUS_NULL_POINTER = 1,
  WD_STATUS_INVALID_ARGUMENT = 2,
  WD_STATUS_DIMENSION_MISMATCH = 3,
  WD_STATUS_NUMERICAL = 4,
  WD_STATUS_PANIC = 5,
} WdStatus;

// Two-term quasiprobability decomposition.
typedef struct WdDecomposition WdDecomposition;

// Seeded random stream.
typedef struct WdRng WdRng;

// Rejection sampler with fixed acceptance ratios.
typedef struct WdSampler WdSampler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len`) and returns the full message length in bytes.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t wd_last_error_message(char *buf, size_t len);

// Builds a decomposition from `c₊`, `c₋` and two distributions of length
// `len` (a power of two).
//
// # Safety
// `sigma_plus` and `sigma_minus` must point to `len` readable doubles and
// `out` to a writable handle slot.
enum WdStatus wd_decomposition_new(double c_plus,
                                   double c_minus,
                                   const double *sigma_plus,
                                   const double *sigma_minus,
                                   size_t len,
                                   struct WdDecomposition **out);

// Builds a benchmark scenario (`"depolarizing"`, `"isotropic"` or `"iqp"`).
//
// # Safety
// `name` must be a NUL-terminated string and `out` a writable handle slot.
enum WdStatus wd_decomposition_scenario(const char *name,
                                        uint64_t seed,
                                        struct WdDecomposition **out);

// # Safety
// `d` must be null or a handle from this library that is not used afterwards.
void wd_decomposition_free(struct WdDecomposition *d);

// # Safety
// `d` must be a live handle and `out` writable.
enum WdStatus wd_decomposition_len(const struct WdDecomposition *d, size_t *out);

// # Safety
// `d` must be a live handle and `out` writable.
enum WdStatus wd_decomposition_gamma(const struct WdDecomposition *d, double *out);

// # Safety
// `d` must be a live handle and `out` writable.
enum WdStatus wd_decomposition_c_minus(const struct WdDecomposition *d, double *out);

// Writes the signed target `c₊σ₊ − c₋σ₋`.
//
// # Safety
// `d` must be a live handle and `out` must hold `len` doubles.
enum WdStatus wd_decomposition_target(const struct WdDecomposition *d, double *out, size_t len);

// Writes the sampled mixture `(c₊σ₊ + c₋σ₋)/γ`.
//
// # Safety
// `d` must be a live handle and `out` must hold `len` doubles.
enum WdStatus wd_decomposition_mixture(const struct WdDecomposition *d, double *out, size_t len);

// Returns a new random stream; never null.
struct WdRng *wd_rng_new(uint64_t seed, uint64_t stream);

// # Safety
// `rng` must be null or a handle from [`wd_rng_new`] that is not used afterwards.
void wd_rng_free(struct WdRng *rng);

// Estimates acceptance ratios from `n` signed draws and builds a sampler.
//
// # Safety
// `d` and `rng` must be live handles and `out` a writable handle slot.
enum WdStatus wd_sampler_estimate(const struct WdDecomposition *d,
                                  uint64_t n,
                                  struct WdRng *rng,
                                  struct WdSampler **out);

// Builds a sampler with the exact acceptance ratios.
//
// # Safety
// `d` must be a live handle and `out` a writable handle slot.
enum WdStatus wd_sampler_ideal(const struct WdDecomposition *d, struct WdSampler **out);

// # Safety
// `s` must be null or a handle from this library that is not used afterwards.
void wd_sampler_free(struct WdSampler *s);

// # Safety
// `s` must be a live handle and `out` must hold `len` doubles.
enum WdStatus wd_sampler_ratios(const struct WdSampler *s, double *out, size_t len);

// Writes the exact law of accepted outcomes.
//
// # Safety
// `s` must be a live handle and `out` must hold `len` doubles.
enum WdStatus wd_sampler_output_distribution(const struct WdSampler *s, double *out, size_t len);

// Upper bound on the sampler's TVD from the target; `+inf` when vacuous.
//
// # Safety
// `s` must be a live handle and `out` writable.
enum WdStatus wd_sampler_tvd_error_bound(const struct WdSampler *s, double *out);

// Draws one accepted outcome using at most `max_attempts` proposals.
//
// # Safety
// `s` and `rng` must be live handles; `out_index` must be writable and
// `out_attempts` null or writable.
enum WdStatus wd_sampler_sample(const struct WdSampler *s,
                                struct WdRng *rng,
                                uint64_t max_attempts,
                                uint64_t *out_index,
                                uint64_t *out_attempts);

// Clipped, normalized estimate of the target from `n ≥ 1` signed draws.
//
// # Safety
// `d` and `rng` must be live handles and `out` must hold `len` doubles.
enum WdStatus wd_estimate_distribution(const struct WdDecomposition *d,
                                       uint64_t n,
                                       struct WdRng *rng,
                                       double *out,
                                       size_t len);

// Total variation distance between two distributions of length `len`.
//
// # Safety
// `p` and `q` must point to `len` readable doubles and `out` be writable.
enum WdStatus wd_tvd(const double *p, const double *q, size_t len, double *out);

// Number of rejection attempts that succeed with probability `1 − δ₂`.
//
// # Safety
// `out` must be writable.
enum WdStatus wd_retry_budget(double gamma,
                              double c_minus,
                              double epsilon,
                              double delta2,
                              uint64_t *out);

// Sample cost of the estimation baseline for accuracy `ε` and confidence `δ`.
//
// # Safety
// `d` must be a live handle and `out` writable.
enum WdStatus wd_bound_estimation(const struct WdDecomposition *d,
                                  double epsilon,
                                  double delta,
                                  double *out);

// Rejection-method sample cost for variant 1, 2 or 3, minimized over the
// failure-probability split. The chosen `δ₁` goes to `out_delta1` when it is
// not null.
//
// # Safety
// `d` must be a live handle, `out` writable and `out_delta1` null or writable.
enum WdStatus wd_bound_rejection(const struct WdDecomposition *d,
                                 uint8_t variant,
                                 double epsilon,
                                 double delta,
                                 double *out,
                                 double *out_delta1);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEAK_DISTILL_H */
