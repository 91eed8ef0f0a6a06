#ifndef FLOWCOVER_H
#define FLOWCOVER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every library call.
 */
typedef enum FcStatus {
  /**
   * Success.
   */
  FcOk = 0,
  /**
   * A required pointer argument was null.
   */
  FcNullPointer = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  FcInvalidUtf8 = 2,
  /**
   * Bad argument, unknown system, or malformed spec.
   */
  FcInvalidArgument = 3,
  /**
   * Numerical failure: trajectory blow-up or escape under the error
   * policy.
   */
  FcNumeric = 4,
} FcStatus;

/**
 * A combinatorial time-tau map over a grid (opaque).
 */
typedef struct FcBoxMap FcBoxMap;

/**
 * A continuous flow (opaque).
 */
typedef struct FcFlow FcFlow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *fc_last_error(void);

/**
 * Library version as a static string.
 */
const char *fc_version(void);

/**
 * Opens a built-in system by name.
 *
 * # Safety
 * `name` must be a valid nul-terminated string and `out` a valid pointer.
 */
enum FcStatus fc_flow_open(const char *name, struct FcFlow **out);

/**
 * Releases a flow handle. A null handle is a no-op.
 *
 * # Safety
 * `flow` must come from [`fc_flow_open`] and not be used afterwards.
 */
void fc_flow_close(struct FcFlow *flow);

/**
 * State dimension of a flow.
 *
 * # Safety
 * `flow` must be a live handle.
 */
uintptr_t fc_flow_dimension(const struct FcFlow *flow);

/**
 * Advances the state `x` (length `len`) by time `t`, writing the result
 * to `out` (same length). Negative `t` integrates backwards.
 *
 * # Safety
 * `x` and `out` must point to `len` readable/writable doubles.
 */
enum FcStatus fc_flow_advance(const struct FcFlow *flow,
                              const double *x,
                              uintptr_t len,
                              double t,
                              double *out);

/**
 * Builds a box map for a built-in system over a grid spec
 * (`x0,x1,y0,y1:nx,ny`) with sampling time `tau`.
 *
 * # Safety
 * String arguments must be valid nul-terminated strings; `out` must be a
 * valid pointer.
 */
enum FcStatus fc_boxmap_open(const char *system,
                             const char *grid_spec,
                             double tau,
                             uintptr_t samples_per_axis,
                             struct FcBoxMap **out);

/**
 * Releases a box map handle. A null handle is a no-op.
 *
 * # Safety
 * `map` must come from [`fc_boxmap_open`] and not be used afterwards.
 */
void fc_boxmap_close(struct FcBoxMap *map);

/**
 * Total number of grid boxes of a box map.
 *
 * # Safety
 * `map` must be a live handle.
 */
uintptr_t fc_boxmap_box_count(const struct FcBoxMap *map);

/**
 * Computes the eventual set of a seed region (`box:..`, `point:..`, or a
 * box-set file path) and returns the connectedness report as a JSON
 * string in `out_json`.
 *
 * # Safety
 * `seed_spec` must be a valid nul-terminated string; `out_json` a valid
 * pointer. Free the result with [`fc_string_free`].
 */
enum FcStatus fc_omega_report(const struct FcBoxMap *map, const char *seed_spec, char **out_json);

/**
 * Runs the quasi-attracting verification of the chain limit of a seed
 * region and returns the summary as a JSON string. `eps0 <= 0` defaults
 * to 8 cell widths, `t0 <= 0` defaults to the map's tau; `stages` must be
 * at least 2.
 *
 * # Safety
 * As [`fc_omega_report`].
 */
enum FcStatus fc_quasi_attracting_report(const struct FcBoxMap *map,
                                         const char *seed_spec,
                                         double eps0,
                                         double t0,
                                         uintptr_t stages,
                                         char **out_json);

/**
 * Releases a string returned by this library. A null pointer is a no-op.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void fc_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* FLOWCOVER_H */
