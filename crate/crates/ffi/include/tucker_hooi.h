#ifndef TUCKER_HOOI_H
#define TUCKER_HOOI_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum TkAlgorithm {
  TK_ALGORITHM_HOOI = 0,
  TK_ALGORITHM_GREEDY = 1,
  TK_ALGORITHM_TUCKALS3 = 2,
} TkAlgorithm;

// Result code of every fallible call.
typedef enum TkStatus {
  TK_STATUS_OK = 0,
  TK_STATUS_NULL_POINTER = 1,
  TK_STATUS_INVALID_ARGUMENT = 2,
  TK_STATUS_SHAPE_MISMATCH = 3,
  TK_STATUS_IO = 4,
  TK_STATUS_FORMAT = 5,
  TK_STATUS_NUMERICAL = 6,
  TK_STATUS_BUFFER_TOO_SMALL = 7,
  TK_STATUS_PANIC = 8,
} TkStatus;

typedef enum TkStopReason {
  TK_STOP_REASON_CONVERGED = 0,
  TK_STOP_REASON_MAX_SWEEPS = 1,
  TK_STOP_REASON_ABORTED = 2,
} TkStopReason;

// Fitted model plus its per-sweep trace.
typedef struct TkSolution TkSolution;

// Dense tensor handle.
typedef struct TkTensor TkTensor;

// Solver settings; start from [`tk_solve_options_default`].
typedef struct TkSolveOptions {
  enum TkAlgorithm algorithm;
  size_t max_sweeps;
  double change_tol;
  double gap_tol;
  // Nonzero selects a seeded random start instead of truncated HOSVD.
  uint8_t random_init;
  uint64_t seed;
} TkSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *tk_last_error(void);

struct TkSolveOptions tk_solve_options_default(void);

// Creates a tensor by copying `shape[..order]` and the column-major `data`
// (whose length must be the product of the shape).
//
// # Safety
// `shape` must point to `order` values and `data` to that many elements.
enum TkStatus tk_tensor_new(size_t order,
                            const size_t *shape,
                            const double *data,
                            struct TkTensor **out);

// # Safety
// `path` must be a NUL-terminated string.
enum TkStatus tk_tensor_read(const char *path, struct TkTensor **out);

// # Safety
// `t` must be a live handle and `path` a NUL-terminated string.
enum TkStatus tk_tensor_write(const struct TkTensor *t, const char *path);

// Number of modes, or 0 for a null handle.
//
// # Safety
// `t` must be null or a live handle.
size_t tk_tensor_order(const struct TkTensor *t);

// Number of elements, or 0 for a null handle.
//
// # Safety
// `t` must be null or a live handle.
size_t tk_tensor_len(const struct TkTensor *t);

// Writes the shape into `shape[..cap]`.
//
// # Safety
// `t` must be a live handle and `shape` writable for `cap` values.
enum TkStatus tk_tensor_shape(const struct TkTensor *t, size_t *shape, size_t cap);

// Borrowed pointer to the column-major data, valid while `t` lives.
//
// # Safety
// `t` must be null or a live handle.
const double *tk_tensor_data(const struct TkTensor *t);

// # Safety
// `t` must be null or a handle not yet freed.
void tk_tensor_free(struct TkTensor *t);

// Seeded planted Tucker tensor with Gaussian noise of relative norm `noise`.
//
// # Safety
// `shape` and `ranks` must each point to `order` values.
enum TkStatus tk_gen_synthetic(size_t order,
                               const size_t *shape,
                               const size_t *ranks,
                               double noise,
                               uint64_t seed,
                               struct TkTensor **out);

// Fits a rank-`ranks` Tucker model. A run that stops early because an update
// fails still returns `TK_STATUS_OK`; check [`tk_solution_stop_reason`].
//
// # Safety
// `t` must be a live handle, `ranks` must point to one value per mode and
// `options` may be null (defaults) or point to valid options.
enum TkStatus tk_solve(const struct TkTensor *t,
                       const size_t *ranks,
                       const struct TkSolveOptions *options,
                       struct TkSolution **out);

// `||core||_F^2`, or NaN for a null handle.
//
// # Safety
// `s` must be null or a live handle.
double tk_solution_objective(const struct TkSolution *s);

// `||X - X_hat||_F / ||X||_F`, or NaN for a null handle.
//
// # Safety
// `s` must be null or a live handle.
double tk_solution_relative_residual(const struct TkSolution *s);

// Normalized KKT aggregate at the returned factors, or NaN for null.
//
// # Safety
// `s` must be null or a live handle.
double tk_solution_kkt(const struct TkSolution *s);

// Number of completed sweeps, or 0 for a null handle.
//
// # Safety
// `s` must be null or a live handle.
size_t tk_solution_sweeps(const struct TkSolution *s);

// # Safety
// `s` must be a live handle.
enum TkStatus tk_solution_stop_reason(const struct TkSolution *s, enum TkStopReason *out);

// Objective after sweep `k` (zero-based) into `out`.
//
// # Safety
// `s` must be a live handle and `out` writable.
enum TkStatus tk_solution_sweep_objective(const struct TkSolution *s, size_t k, double *out);

// Copies factor `n` (column-major, `rows x cols`) into `buf[..cap]` and its
// dimensions into `rows` / `cols` when those are non-null. Passing a null
// `buf` with `cap == 0` only queries the dimensions.
//
// # Safety
// `s` must be a live handle; non-null pointers must be writable.
enum TkStatus tk_solution_factor(const struct TkSolution *s,
                                 size_t n,
                                 size_t *rows,
                                 size_t *cols,
                                 double *buf,
                                 size_t cap);

// Copies the core tensor into a new handle.
//
// # Safety
// `s` must be a live handle.
enum TkStatus tk_solution_core(const struct TkSolution *s, struct TkTensor **out);

// Writes the JSON trace; `input` must be the tensor that was solved.
//
// # Safety
// Both handles must be live and `path` a NUL-terminated string.
enum TkStatus tk_solution_write_trace(const struct TkSolution *s,
                                      const struct TkTensor *input,
                                      const char *path);

// # Safety
// `s` must be null or a handle not yet freed.
void tk_solution_free(struct TkSolution *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TUCKER_HOOI_H */
