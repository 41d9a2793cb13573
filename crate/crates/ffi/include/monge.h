#ifndef MONGE_H
#define MONGE_H

/* Generated by cbindgen from the monge-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call in this API.
 */
typedef enum MongeStatus {
  /**
   * The call succeeded.
   */
  MongeStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  MongeStatus_NullPointer = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  MongeStatus_InvalidUtf8 = 2,
  /**
   * The input was rejected (malformed JSON, dimension mismatch,
   * invalid measure or parameter).
   */
  MongeStatus_InvalidInput = 3,
  /**
   * The solver failed on a well-formed input.
   */
  MongeStatus_SolverFailure = 4,
  /**
   * The provided buffer is too small; the required size was written
   * to the `written` out-parameter.
   */
  MongeStatus_BufferTooSmall = 5,
  /**
   * The queried quantity does not exist on this handle (for example
   * the secondary cost of a plain transport plan).
   */
  MongeStatus_Missing = 6,
  /**
   * A panic was caught at the boundary; state is unchanged.
   */
  MongeStatus_InternalPanic = 7,
} MongeStatus;

/**
 * Opaque discrete measure handle (canonicalized and normalized).
 */
typedef struct MongeMeasure MongeMeasure;

/**
 * Opaque metric handle (Euclidean, p-norm, polyhedral, or Hilbert).
 */
typedef struct MongeMetric MongeMetric;

/**
 * Opaque transport plan handle, optionally carrying the two-stage
 * selection costs.
 */
typedef struct MongePlan MongePlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *monge_version(void);

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread. Never null;
 * empty before the first failure.
 */
const char *monge_last_error(void);

/**
 * Build a metric from JSON, e.g. `{"kind":"euclidean"}`,
 * `{"kind":"pnorm","p":1.5}`, `{"kind":"polyhedral","unit_ball":[[1,1],...]}`,
 * or `{"kind":"hilbert","body":{"kind":"ball","center":[0,0],"radius":1}}`.
 *
 * # Safety
 * `json` must be a valid nul-terminated C string; `out` must point to
 * writable storage for one pointer. On success `*out` owns the handle
 * and must be released with [`monge_metric_free`].
 */
enum MongeStatus monge_metric_from_json(const char *json, struct MongeMetric **out);

/**
 * Release a metric handle. Null is ignored.
 *
 * # Safety
 * `metric` must be null or a pointer returned by
 * [`monge_metric_from_json`] that has not been freed yet.
 */
void monge_metric_free(struct MongeMetric *metric);

/**
 * Build a measure from JSON:
 * `{"dim":2,"points":[[0,0],[1,0]],"weights":[1,1]}`. Points are
 * deduplicated, sorted, and weights normalized to total mass one.
 *
 * # Safety
 * `json` must be a valid nul-terminated C string; `out` must point to
 * writable storage for one pointer. On success `*out` owns the handle
 * and must be released with [`monge_measure_free`].
 */
enum MongeStatus monge_measure_from_json(const char *json, struct MongeMeasure **out);

/**
 * Number of support atoms.
 *
 * # Safety
 * `measure` must be a live handle; `out` must be writable.
 */
enum MongeStatus monge_measure_len(const struct MongeMeasure *measure, uintptr_t *out);

/**
 * Ambient dimension of the support points.
 *
 * # Safety
 * `measure` must be a live handle; `out` must be writable.
 */
enum MongeStatus monge_measure_dim(const struct MongeMeasure *measure, uintptr_t *out);

/**
 * Release a measure handle. Null is ignored.
 *
 * # Safety
 * `measure` must be null or a pointer returned by
 * [`monge_measure_from_json`] that has not been freed yet.
 */
void monge_measure_free(struct MongeMeasure *measure);

/**
 * Distance between two points of dimension `dim` under `metric`.
 *
 * # Safety
 * `metric` must be a live handle; `x` and `y` must point to `dim`
 * readable doubles; `out` must be writable.
 */
enum MongeStatus monge_distance(const struct MongeMetric *metric,
                                const double *x,
                                const double *y,
                                uintptr_t dim,
                                double *out);

/**
 * Optimal distance-cost transport value between two measures.
 *
 * # Safety
 * `metric`, `mu1`, `mu2` must be live handles; `out` must be writable.
 */
enum MongeStatus monge_wasserstein(const struct MongeMetric *metric,
                                   const struct MongeMeasure *mu1,
                                   const struct MongeMeasure *mu2,
                                   double *out);

/**
 * Solve the distance-cost problem and return the optimal plan.
 *
 * # Safety
 * `metric`, `mu1`, `mu2` must be live handles; `out` must point to
 * writable storage for one pointer. On success `*out` owns the handle
 * and must be released with [`monge_plan_free`].
 */
enum MongeStatus monge_solve(const struct MongeMetric *metric,
                             const struct MongeMeasure *mu1,
                             const struct MongeMeasure *mu2,
                             struct MongePlan **out);

/**
 * Solve the two-stage problem: distance-cost optimal value, then the
 * squared-Euclidean secondary selection on the optimal face. Pass a
 * non-positive `eta` to use the default tight-set tolerance.
 *
 * # Safety
 * `metric`, `mu1`, `mu2` must be live handles; `out` must point to
 * writable storage for one pointer. On success `*out` owns the handle
 * and must be released with [`monge_plan_free`].
 */
enum MongeStatus monge_solve_secondary(const struct MongeMetric *metric,
                                       const struct MongeMeasure *mu1,
                                       const struct MongeMeasure *mu2,
                                       double eta,
                                       struct MongePlan **out);

/**
 * Total distance cost of the plan.
 *
 * # Safety
 * `plan` must be a live handle; `out` must be writable.
 */
enum MongeStatus monge_plan_primary_cost(const struct MongePlan *plan, double *out);

/**
 * Squared-Euclidean secondary cost; `Missing` for plans that did not
 * come from [`monge_solve_secondary`].
 *
 * # Safety
 * `plan` must be a live handle; `out` must be writable.
 */
enum MongeStatus monge_plan_secondary_cost(const struct MongePlan *plan, double *out);

/**
 * Number of support entries in the plan.
 *
 * # Safety
 * `plan` must be a live handle; `out` must be writable.
 */
enum MongeStatus monge_plan_len(const struct MongePlan *plan, uintptr_t *out);

/**
 * Read entry `index` of the plan as `(source, target, mass)`.
 *
 * # Safety
 * `plan` must be a live handle; `source`, `target`, `mass` must be
 * writable.
 */
enum MongeStatus monge_plan_entry(const struct MongePlan *plan,
                                  uintptr_t index,
                                  uintptr_t *source,
                                  uintptr_t *target,
                                  double *mass);

/**
 * Splitting index of the plan: zero exactly when it is induced by a map.
 *
 * # Safety
 * `plan` must be a live handle; `out` must be writable.
 */
enum MongeStatus monge_plan_splitting_index(const struct MongePlan *plan, double *out);

/**
 * Serialize the plan to JSON (same schema as the CLI's `plan.json`).
 * Writes at most `capacity` bytes including the trailing nul and stores
 * the required size (including the nul) in `written`. When the buffer
 * is too small, returns `BufferTooSmall` and leaves `written` set so
 * the caller can retry; `buffer` may be null only with zero capacity.
 *
 * # Safety
 * `plan` must be a live handle; `buffer` must point to `capacity`
 * writable bytes (or be null with `capacity == 0`); `written` must be
 * writable.
 */
enum MongeStatus monge_plan_to_json(const struct MongePlan *plan,
                                    char *buffer,
                                    uintptr_t capacity,
                                    uintptr_t *written);

/**
 * Release a plan handle. Null is ignored.
 *
 * # Safety
 * `plan` must be null or a pointer returned by [`monge_solve`] or
 * [`monge_solve_secondary`] that has not been freed yet.
 */
void monge_plan_free(struct MongePlan *plan);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MONGE_H */
