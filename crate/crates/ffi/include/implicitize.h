#ifndef IMPLICITIZE_H
#define IMPLICITIZE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ImpStatus {
  IMP_STATUS_OK = 0,
  IMP_STATUS_NULL_POINTER = 1,
  IMP_STATUS_INVALID_ARGUMENT = 2,
  IMP_STATUS_DIMENSION_MISMATCH = 3,
  // The fixed-point solve stopped without converging.
  IMP_STATUS_NOT_CONVERGED = 4,
  // The user callback returned a nonzero code.
  IMP_STATUS_CALLBACK_FAILED = 5,
  IMP_STATUS_CONFIG_ERROR = 6,
  IMP_STATUS_IO_ERROR = 7,
  IMP_STATUS_INTERNAL = 8,
  IMP_STATUS_PANIC = 9,
} ImpStatus;

typedef enum ImpMassMode {
  IMP_MASS_MODE_IDENTITY_FD = 0,
  IMP_MASS_MODE_LUMPED_FE = 1,
  IMP_MASS_MODE_CONSISTENT_FE = 2,
} ImpMassMode;

// Opaque Anderson accelerator.
typedef struct ImpAnderson ImpAnderson;

typedef struct ImpSolveOptions {
  size_t depth;
  double damping;
  size_t alternation;
  double rel_tol;
  double abs_tol;
  size_t max_iter;
} ImpSolveOptions;

// `out = G(x)` for vectors of length `n`; nonzero return aborts the solve.
typedef int (*ImpMapFn)(void *ctx, size_t n, const double *x, double *out);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length in bytes of the last error message on this thread, without the
// terminating NUL; 0 when there is none.
size_t imp_last_error_length(void);

// Copies the last error message into `buf` (NUL-terminated, truncated to
// `len - 1` bytes). Returns the number of bytes written without the NUL.
//
// # Safety
// `buf` must be valid for `len` bytes or null.
size_t imp_last_error_message(char *buf, size_t len);

// Creates an accelerator with window depth `depth`. `alternation` of 1 mixes
// on every step.
//
// # Safety
// `out` must be a valid pointer to write the handle to.
enum ImpStatus imp_anderson_new(size_t depth,
                                double damping,
                                size_t alternation,
                                struct ImpAnderson **out);

// Writes the next iterate given `u` and `g = G(u)`, all of length `n`.
// `accelerated` may be null.
//
// # Safety
// `handle` must come from [`imp_anderson_new`]; `u`, `g` and `next` must be
// valid for `n` doubles.
enum ImpStatus imp_anderson_step(struct ImpAnderson *handle,
                                 size_t n,
                                 const double *u,
                                 const double *g,
                                 double *next,
                                 bool *accelerated);

// Empties the window; the configuration is kept.
//
// # Safety
// `handle` must come from [`imp_anderson_new`].
enum ImpStatus imp_anderson_reset(struct ImpAnderson *handle);

// # Safety
// `handle` must come from [`imp_anderson_new`] and not be used afterwards.
// Null is ignored.
void imp_anderson_free(struct ImpAnderson *handle);

struct ImpSolveOptions imp_solve_options_default(void);

// Solves `x = G(x)` from `x0`. On [`ImpStatus::Ok`] and
// [`ImpStatus::NotConverged`] `x_out` holds the last checked iterate and
// `iterations` (may be null) the number of map evaluations.
//
// # Safety
// `x0` and `x_out` must be valid for `n` doubles; `options` must point to
// a valid struct; `map` is called with `ctx` untouched.
enum ImpStatus imp_solve_fixed_point(ImpMapFn map,
                                     void *ctx,
                                     size_t n,
                                     const double *x0,
                                     const struct ImpSolveOptions *options,
                                     double *x_out,
                                     size_t *iterations);

// Largest time step for which the plain (depth 0) fixed-point iteration of
// the heat equation contracts, `1 / (mu lambda_max)`, on the unit
// `dims`-cube split into `cells` cells per side.
//
// # Safety
// `out` must be valid for one double.
enum ImpStatus imp_heat_cfl_threshold(size_t dims,
                                      size_t cells,
                                      double mu,
                                      enum ImpMassMode mode,
                                      double *out);

// Runs an experiment config file and writes its CSV. `output` may be null
// to use the config's own path; `threads` of 0 uses every core.
//
// # Safety
// `config_path` and non-null `output` must be NUL-terminated UTF-8 strings.
enum ImpStatus imp_run_config(const char *config_path,
                              const char *output,
                              bool timing,
                              size_t threads);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IMPLICITIZE_H */
