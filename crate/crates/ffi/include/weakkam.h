#ifndef WEAKKAM_H
#define WEAKKAM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WkStatus {
  WK_STATUS_OK = 0,
  WK_STATUS_NULL_POINTER = 1,
  WK_STATUS_INVALID_ARGUMENT = 2,
  WK_STATUS_CONFIG = 3,
  WK_STATUS_NUMERICAL = 4,
  WK_STATUS_BUFFER_TOO_SMALL = 5,
  WK_STATUS_PANIC = 6,
} WkStatus;

typedef struct WkKernel WkKernel;

/*
 A discretized Hamiltonian with its kernel powers.
 */
typedef struct WkPipeline WkPipeline;

/*
 Critical value, barrier and Aubry set of one pipeline.
 */
typedef struct WkWeakKam WkWeakKam;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty if none. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *wk_last_error(void);

/*
 Builds the Hamiltonian `name` declared in the TOML document `config`.
 */
enum WkStatus wk_pipeline_create(const char *config, const char *name, struct WkPipeline **out);

/*
 Pipeline of `H(x, -p)` on the same discretization.
 */
enum WkStatus wk_pipeline_reversed(const struct WkPipeline *p, struct WkPipeline **out);

void wk_pipeline_free(struct WkPipeline *p);

/*
 Number of torus grid nodes.
 */
enum WkStatus wk_pipeline_nodes(const struct WkPipeline *p, size_t *out);

/*
 `c = -min_y h^T(y,y) / T` at the configured `t_max`.
 */
enum WkStatus wk_critical_value(const struct WkPipeline *p, double *out);

/*
 Action kernel at time `t`, a positive multiple of the step.
 */
enum WkStatus wk_kernel_at(const struct WkPipeline *p, double t, struct WkKernel **out);

void wk_kernel_free(struct WkKernel *k);

/*
 Side length `N` of the `N x N` kernel.
 */
enum WkStatus wk_kernel_size(const struct WkKernel *k, size_t *out);

enum WkStatus wk_kernel_time(const struct WkKernel *k, double *out);

/*
 Row-major entries `K[y][x]`; `+inf` marks unreachable pairs.
 */
enum WkStatus wk_kernel_entries(const struct WkKernel *k, double *buf, size_t len);

/*
 Min-plus product `a ⊗ b` (first `a`, then `b`).
 */
enum WkStatus wk_kernel_compose(const struct WkKernel *a,
                                const struct WkKernel *b,
                                struct WkKernel **out);

/*
 `v(x) = min_y u(y) + K(y,x)`; `u` and `v` hold `len = N` values.
 */
enum WkStatus wk_kernel_apply(const struct WkKernel *k, const double *u, size_t len, double *v);

/*
 Critical value, barrier and Aubry set with the configured tolerances.
 */
enum WkStatus wk_weakkam_compute(const struct WkPipeline *p, struct WkWeakKam **out);

void wk_weakkam_free(struct WkWeakKam *w);

enum WkStatus wk_weakkam_critical_value(const struct WkWeakKam *w, double *out);

/*
 Nonzero when the barrier sequence met the Cauchy tolerance.
 */
enum WkStatus wk_weakkam_barrier_converged(const struct WkWeakKam *w, int32_t *out);

/*
 Row-major barrier `h[y][x]`, `N * N` values.
 */
enum WkStatus wk_weakkam_barrier(const struct WkWeakKam *w, double *buf, size_t len);

/*
 Aubry set node indices in increasing order. `count` always receives the
 set size; `WK_STATUS_BUFFER_TOO_SMALL` is returned when `cap < count`.
 */
enum WkStatus wk_weakkam_aubry(const struct WkWeakKam *w, size_t *buf, size_t cap, size_t *count);

/*
 `sup |K_H^t ⊗ K_G^s - K_G^s ⊗ K_H^t|` for two pipelines on the same grid and step.
 */
enum WkStatus wk_commutation_residual(const struct WkPipeline *h,
                                      const struct WkPipeline *g,
                                      double t,
                                      double s,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEAKKAM_H */
