#ifndef QUENCH_RENYI_H
#define QUENCH_RENYI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QrStatus {
  QR_STATUS_OK = 0,
  QR_STATUS_NULL_POINTER = 1,
  QR_STATUS_INVALID_ARGUMENT = 2,
  QR_STATUS_DOMAIN = 3,
  QR_STATUS_INFEASIBLE = 4,
  QR_STATUS_NUMERICAL = 5,
  QR_STATUS_BOUND_VIOLATION = 6,
  QR_STATUS_LINEAR_ALGEBRA = 7,
  QR_STATUS_IO = 8,
  QR_STATUS_PANIC = 9,
} QrStatus;

typedef enum QrState {
  QR_STATE_MI = 0,
  QR_STATE_CDW = 1,
} QrState;

typedef enum QrEngine {
  QR_ENGINE_NAIVE = 0,
  QR_ENGINE_RYSER = 1,
  QR_ENGINE_BBFG = 2,
  /**
   * Uses the `workers` argument; 0 means all available cores.
   */
  QR_ENGINE_BBFG_PARALLEL = 3,
} QrEngine;

/**
 * Single-particle modes of an open chain.
 */
typedef struct QrChain QrChain;

/**
 * Exact-diagonalization solver for one quench.
 */
typedef struct QrQuench QrQuench;

/**
 * One entropy evaluation. `s2_gaussian` is NaN unless requested.
 */
typedef struct QrEntropyPoint {
  size_t sites;
  size_t la;
  double tj;
  double s2;
  double perm_re;
  double perm_im;
  double g;
  double s_tilde;
  double lower_bound;
  double s2_gaussian;
} QrEntropyPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qr_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`) and returns the buffer size the
 * full message needs, or 0 when there is no error.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or be null with `len == 0`.
 */
size_t qr_last_error(char *buf, size_t len);

/**
 * Solves the open chain of `sites` sites with hopping `hopping`.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle owned by
 * the caller.
 */
enum QrStatus qr_chain_new(size_t sites, double hopping, struct QrChain **out);

/**
 * # Safety
 * `chain` must come from [`qr_chain_new`] and not be used afterwards.
 */
void qr_chain_free(struct QrChain *chain);

/**
 * `S_2` at time `tj` after releasing `state` into the chain, with the
 * bound diagnostics. `state` is a [`QrState`], `engine` a [`QrEngine`];
 * `la == 0` cuts the chain in half.
 *
 * # Safety
 * `chain` must be a live handle and `out` a valid pointer.
 */
enum QrStatus qr_entropy_point(const struct QrChain *chain,
                               uint32_t state,
                               size_t la,
                               double tj,
                               uint32_t engine,
                               size_t workers,
                               bool gaussian,
                               struct QrEntropyPoint *out);

/**
 * Permanent of a `dim x dim` complex matrix given row-major as
 * interleaved `(re, im)` pairs, `2 dim^2` doubles in total.
 *
 * # Safety
 * `data` must hold `2 * dim * dim` doubles; `out_re` and `out_im` must be
 * valid pointers.
 */
enum QrStatus qr_permanent(const double *data,
                           size_t dim,
                           uint32_t engine,
                           size_t workers,
                           double *out_re,
                           double *out_im);

/**
 * Builds and diagonalizes the Bose-Hubbard quench from `state` with
 * on-site interaction `interaction` (in units of the hopping).
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle owned by
 * the caller.
 */
enum QrStatus qr_quench_new(size_t sites,
                            uint32_t state,
                            double interaction,
                            size_t la,
                            struct QrQuench **out);

/**
 * # Safety
 * `q` must come from [`qr_quench_new`] and not be used afterwards.
 */
void qr_quench_free(struct QrQuench *q);

/**
 * Hilbert-space dimension of the quench, or 0 for a null handle.
 *
 * # Safety
 * `q` must be a live handle or null.
 */
size_t qr_quench_dim(const struct QrQuench *q);

/**
 * Exact `S_2` at time `tj`.
 *
 * # Safety
 * `q` must be a live handle and `out` a valid pointer.
 */
enum QrStatus qr_quench_s2(const struct QrQuench *q, double tj, double *out);

/**
 * Mean `S_2` of `samples` random states in the particle-number sector of
 * `state`, with its standard error.
 *
 * # Safety
 * `out_mean` and `out_stderr` must be valid pointers.
 */
enum QrStatus qr_page_value(size_t sites,
                            uint32_t state,
                            size_t la,
                            size_t samples,
                            uint64_t seed,
                            double *out_mean,
                            double *out_stderr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUENCH_RENYI_H */
