#ifndef TQB_H
#define TQB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define TQB_OK 0

/**
 * A required pointer argument was null.
 */
#define TQB_ERR_NULL 1

/**
 * Unknown model or parameter, bad value, or invalid string.
 */
#define TQB_ERR_CONFIG 2

/**
 * Singular system or non-finite solution during a step.
 */
#define TQB_ERR_NUMERIC 3

/**
 * Output buffers shorter than `tqb_simulation_knot_count`.
 */
#define TQB_ERR_BUFFER 4

/**
 * Internal panic; the handle should be freed.
 */
#define TQB_ERR_PANIC 5

/**
 * Opaque simulation handle.
 */
typedef struct TqbSimulation TqbSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a simulation of a preset model.
 *
 * `model` is one of `linear`, `brusselator`, `schnakenberg`, `gray-scott`.
 * `keys[i] = values[i]` for `i < n_overrides` replace model constants or
 * `n`, `dt`, `t_end`; `keys` and `values` may be null when `n_overrides` is 0.
 * On success `*out` receives a handle to release with `tqb_simulation_free`.
 *
 * # Safety
 * `model` and each key must be NUL-terminated strings; `keys` and `values`
 * must point to `n_overrides` elements; `out` must be writable.
 */
int32_t tqb_simulation_new(const char *model,
                           const char *const *keys,
                           const double *values,
                           size_t n_overrides,
                           struct TqbSimulation **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `sim` must come from `tqb_simulation_new` and not be used afterwards.
 */
void tqb_simulation_free(struct TqbSimulation *sim);

/**
 * Takes one step of length `dt`.
 *
 * # Safety
 * `sim` must be a live handle.
 */
int32_t tqb_simulation_step(struct TqbSimulation *sim, double dt);

/**
 * Advances to time `t` with the preset step, the last step shortened to
 * land on `t`. Times not ahead of the current one are a no-op.
 *
 * # Safety
 * `sim` must be a live handle.
 */
int32_t tqb_simulation_advance_to(struct TqbSimulation *sim, double t);

/**
 * Current time, or NaN for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
double tqb_simulation_time(const struct TqbSimulation *sim);

/**
 * Preset time step, or NaN for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
double tqb_simulation_dt(const struct TqbSimulation *sim);

/**
 * Number of mesh knots (intervals + 1), or 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
size_t tqb_simulation_knot_count(const struct TqbSimulation *sim);

/**
 * Copies knot positions and nodal U, V into caller buffers of length `len`.
 * Any of `x`, `u`, `v` may be null to skip it.
 *
 * # Safety
 * `sim` must be a live handle; non-null buffers must hold `len` doubles.
 */
int32_t tqb_simulation_nodal(const struct TqbSimulation *sim,
                             double *x,
                             double *u,
                             double *v,
                             size_t len);

/**
 * Spline values of U and V at an arbitrary `x` in the domain.
 *
 * # Safety
 * `sim` must be a live handle; `u` and `v` must be writable.
 */
int32_t tqb_simulation_evaluate(const struct TqbSimulation *sim, double x, double *u, double *v);

/**
 * Message of the last failed call on this thread, empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *tqb_last_error(void);

/**
 * Library version, a static string.
 */
const char *tqb_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TQB_H */
