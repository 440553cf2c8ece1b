#ifndef BOUNDLAB_H
#define BOUNDLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum BlStatus {
  BL_STATUS_OK = 0,
  BL_STATUS_INVALID_ARGUMENT = 1,
  BL_STATUS_NULL_POINTER = 2,
  BL_STATUS_PARSE = 3,
  BL_STATUS_SCHEMA_VERSION = 4,
  BL_STATUS_IO = 5,
  BL_STATUS_MISSING_MODEL = 6,
  BL_STATUS_NO_SOLUTION = 7,
  BL_STATUS_NUMERICAL = 8,
  BL_STATUS_INTERNAL = 9,
} BlStatus;

/**
 * An instance loaded or generated through [`bl_instance_read`] or
 * [`bl_instance_generate`].
 */
typedef struct BlInstance BlInstance;

/**
 * A trained model loaded with [`bl_model_load`].
 */
typedef struct BlModel BlModel;

/**
 * The outcome of [`bl_solve`].
 */
typedef struct BlResult BlResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread; empty after a
 * success. Valid until the next call on the same thread.
 */
const char *bl_last_error(void);

/**
 * Library version as a static string.
 */
const char *bl_version(void);

/**
 * Reads an instance file.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a writable pointer.
 */
enum BlStatus bl_instance_read(const char *path, struct BlInstance **out);

/**
 * Generates one instance of `family` (`setcover`, `auction`, `cfl`) at a
 * size `preset` (`tiny`, `easy`, `medium`).
 *
 * # Safety
 * String arguments must be nul-terminated and `out` writable.
 */
enum BlStatus bl_instance_generate(const char *family,
                                   const char *preset,
                                   uint64_t seed,
                                   struct BlInstance **out);

/**
 * Number of variables, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t bl_instance_num_vars(const struct BlInstance *inst);

/**
 * # Safety
 * `inst` must be null or a handle not yet freed.
 */
void bl_instance_free(struct BlInstance *inst);

/**
 * Loads a trained model file.
 *
 * # Safety
 * `path` must be nul-terminated and `out` writable.
 */
enum BlStatus bl_model_load(const char *path, struct BlModel **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void bl_model_free(struct BlModel *model);

/**
 * Solves `inst` with full strong branching and the named selector
 * (`dfs`, `bfs`, `bes`, `learned`; the last needs `model`). A negative
 * `node_limit` means no limit; times use the deterministic work clock.
 *
 * # Safety
 * Handles must be live (`model` may be null), `selector` nul-terminated
 * and `out` writable.
 */
enum BlStatus bl_solve(const struct BlInstance *inst,
                       const char *selector,
                       const struct BlModel *model,
                       double time_limit,
                       int64_t node_limit,
                       struct BlResult **out);

/**
 * Status name (`optimal`, `infeasible`, `node-limit`, `time-limit`);
 * valid while the result lives. Null for a null handle.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
const char *bl_result_status(const struct BlResult *res);

/**
 * Incumbent objective in the instance's own sense.
 *
 * # Safety
 * `res` must be a live handle and `out` writable.
 */
enum BlStatus bl_result_objective(const struct BlResult *res, double *out);

/**
 * Copies the incumbent into `buf`, which must hold `len` >= number of
 * variables entries.
 *
 * # Safety
 * `res` must be a live handle and `buf` valid for `len` writes.
 */
enum BlStatus bl_result_solution(const struct BlResult *res, double *buf, size_t len);

/**
 * Processed nodes, or 0 for a null handle.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
size_t bl_result_nodes(const struct BlResult *res);

/**
 * Nodes processed when the best incumbent was found.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
size_t bl_result_bpb_nodes(const struct BlResult *res);

/**
 * Solve time in seconds on the work clock.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
double bl_result_solve_time(const struct BlResult *res);

/**
 * # Safety
 * `res` must be null or a handle not yet freed.
 */
void bl_result_free(struct BlResult *res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOUNDLAB_H */
