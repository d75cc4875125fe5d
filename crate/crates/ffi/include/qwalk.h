#ifndef QWALK_H
#define QWALK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum QwStatus {
  QW_STATUS_OK = 0,
  QW_STATUS_NULL_POINTER = 1,
  QW_STATUS_INVALID_ARGUMENT = 2,
  QW_STATUS_INVALID_COIN = 3,
  QW_STATUS_CONFIGURATION = 4,
  QW_STATUS_NUMERIC = 5,
  QW_STATUS_BUFFER_TOO_SMALL = 6,
  QW_STATUS_PANIC = 7,
} QwStatus;

// A validated 2x2 unitary coin.
typedef struct QwCoin QwCoin;

// A probability distribution on a contiguous range of sites.
typedef struct QwDistribution QwDistribution;

// A limit law.
typedef struct QwLaw QwLaw;

// A discrete-time walk: its coin schedule and current state.
typedef struct QwWalk QwWalk;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length without the NUL.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t qw_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *qw_version(void);

// The Hadamard coin.
//
// # Safety
// `out` must be a valid pointer.
enum QwStatus qw_coin_hadamard(struct QwCoin **out);

// Coin `[[a, b], [c, d]]`, rejected unless unitary.
//
// # Safety
// `out` must be a valid pointer.
enum QwStatus qw_coin_new(double a_re,
                          double a_im,
                          double b_re,
                          double b_im,
                          double c_re,
                          double c_im,
                          double d_re,
                          double d_im,
                          struct QwCoin **out);

// `[[sqrt r, sqrt(1-r)], [sqrt(1-r), -sqrt r]]` for `r` in (0, 1).
//
// # Safety
// `out` must be a valid pointer.
enum QwStatus qw_coin_ftd(double r, struct QwCoin **out);

// `exp(-i eps sigma_x)`.
//
// # Safety
// `out` must be a valid pointer.
enum QwStatus qw_coin_dirac(double eps, struct QwCoin **out);

// # Safety
// `coin` must be null or come from a `qw_coin_*` constructor, and is
// invalid afterwards.
void qw_coin_free(struct QwCoin *coin);

// Walk at the origin with coin state `(q_L, q_R)` and a homogeneous coin.
//
// # Safety
// `coin` must be a live handle and `out` a valid pointer.
enum QwStatus qw_walk_new(const struct QwCoin *coin,
                          double ql_re,
                          double ql_im,
                          double qr_re,
                          double qr_im,
                          struct QwWalk **out);

// Final-time-dependent walk with `sqrt r(T) = r / T^alpha`.
//
// # Safety
// `out` must be a valid pointer.
enum QwStatus qw_walk_new_ftd(uint64_t final_time,
                              double alpha,
                              double r,
                              double ql_re,
                              double ql_im,
                              double qr_re,
                              double qr_im,
                              struct QwWalk **out);

// Advances the walk by `steps`.
//
// # Safety
// `walk` must be a live handle.
enum QwStatus qw_walk_step(struct QwWalk *walk, uint64_t steps);

// Current time.
//
// # Safety
// `walk` must be a live handle and `out` a valid pointer.
enum QwStatus qw_walk_time(const struct QwWalk *walk, uint64_t *out);

// Amplitudes at site `n`; zero outside the support.
//
// # Safety
// `walk` must be a live handle and `out` point to 4 writable doubles
// (re L, im L, re R, im R).
enum QwStatus qw_walk_amplitude(const struct QwWalk *walk, int64_t n, double *out);

// Position distribution of the current state.
//
// # Safety
// `walk` must be a live handle and `out` a valid pointer.
enum QwStatus qw_walk_distribution(const struct QwWalk *walk, struct QwDistribution **out);

// # Safety
// `walk` must be null or come from `qw_walk_new*`.
void qw_walk_free(struct QwWalk *walk);

// CTQW from the origin, `|psi(x)|^2 = J_x(|gamma| t)^2`.
//
// # Safety
// `out` must be a valid pointer.
enum QwStatus qw_ctqw_exact(double gamma_re,
                            double gamma_im,
                            double t,
                            struct QwDistribution **out);

// Simple random walk with right-step probability `p` after `t` steps.
//
// # Safety
// `out` must be a valid pointer.
enum QwStatus qw_random_walk(double p, uint64_t t, struct QwDistribution **out);

// Lazy random walk with `r(T) = r / T^alpha`.
//
// # Safety
// `out` must be a valid pointer.
enum QwStatus qw_lazy_walk(uint64_t final_time,
                           double alpha,
                           double r,
                           struct QwDistribution **out);

// First site and number of sites.
//
// # Safety
// `dist` must be a live handle; `start` and `len` valid pointers.
enum QwStatus qw_distribution_range(const struct QwDistribution *dist, int64_t *start, size_t *len);

// Copies the probabilities into `buf`; fails with `BufferTooSmall` when
// `cap` is less than the length.
//
// # Safety
// `dist` must be a live handle and `buf` point to `cap` writable doubles.
enum QwStatus qw_distribution_copy(const struct QwDistribution *dist, double *buf, size_t cap);

// Moment `sum n^j p_n`.
//
// # Safety
// `dist` must be a live handle and `out` a valid pointer.
enum QwStatus qw_distribution_moment(const struct QwDistribution *dist, uint32_t j, double *out);

// # Safety
// `dist` must be null or come from this library.
void qw_distribution_free(struct QwDistribution *dist);

// Konno law of the walk with `coin` from coin state `(q_L, q_R)`.
//
// # Safety
// `coin` must be a live handle and `out` a valid pointer.
enum QwStatus qw_law_konno(const struct QwCoin *coin,
                           double ql_re,
                           double ql_im,
                           double qr_re,
                           double qr_im,
                           struct QwLaw **out);

// Arcsine law on `(-|gamma|, |gamma|)`.
//
// # Safety
// `out` must be a valid pointer.
enum QwStatus qw_law_arcsine(double gamma_re, double gamma_im, struct QwLaw **out);

// Normal law with mean `mu` and variance `nu`.
//
// # Safety
// `out` must be a valid pointer.
enum QwStatus qw_law_normal(double mu, double nu, struct QwLaw **out);

// Distribution function at `x`.
//
// # Safety
// `law` must be a live handle and `out` a valid pointer.
enum QwStatus qw_law_cdf(const struct QwLaw *law, double x, double *out);

// Density at `x` (continuous laws only).
//
// # Safety
// `law` must be a live handle and `out` a valid pointer.
enum QwStatus qw_law_pdf(const struct QwLaw *law, double x, double *out);

// # Safety
// `law` must be null or come from a `qw_law_*` constructor.
void qw_law_free(struct QwLaw *law);

// Kolmogorov distance between `dist` rescaled by `1/scale` and `law`.
//
// # Safety
// `dist` and `law` must be live handles and `out` a valid pointer.
enum QwStatus qw_ks_distance(const struct QwDistribution *dist,
                             double scale,
                             const struct QwLaw *law,
                             double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QWALK_H */
