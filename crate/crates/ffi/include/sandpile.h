#ifndef SANDPILE_H
#define SANDPILE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpPolicy {
  SP_POLICY_PARALLEL = 0,
  SP_POLICY_SEQUENTIAL_LEX_MIN = 1,
  SP_POLICY_SEQUENTIAL_RANDOM = 2,
} SpPolicy;

typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_UTF8 = 2,
  SP_STATUS_PARSE = 3,
  SP_STATUS_INVALID_MODEL = 4,
  SP_STATUS_INCOMPLETE_MODEL = 5,
  SP_STATUS_INVALID_INSTANCE = 6,
  SP_STATUS_DIMENSION_MISMATCH = 7,
  SP_STATUS_OVERFLOW = 8,
  SP_STATUS_WATCHDOG = 9,
  SP_STATUS_INVARIANT_VIOLATION = 10,
  SP_STATUS_UNSUPPORTED = 11,
  SP_STATUS_NOT_APPLICABLE = 12,
  SP_STATUS_INTERNAL = 13,
} SpStatus;

/**
 * Opaque circuit handle.
 */
typedef struct SpCircuit SpCircuit;

/**
 * Opaque configuration handle.
 */
typedef struct SpConfig SpConfig;

/**
 * Opaque model handle.
 */
typedef struct SpModel SpModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Valid until the next failing call.
 */
const char *sp_last_error(void);

/**
 * Parses a `sandpile-model v1` text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SpStatus sp_model_parse(const char *text_, struct SpModel **out);

/**
 * Built-in families: `von-neumann`, `moore`, `kadanoff-1d`, `decreasing-1d`.
 *
 * # Safety
 * `family` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SpStatus sp_model_builtin(const char *family, size_t dim, int64_t r, struct SpModel **out);

/**
 * # Safety
 * `m` must come from this library or be null.
 */
void sp_model_free(struct SpModel *m);

/**
 * # Safety
 * `m` must be a live model handle.
 */
size_t sp_model_dim(const struct SpModel *m);

/**
 * # Safety
 * `m` must be a live model handle.
 */
uint64_t sp_model_threshold(const struct SpModel *m);

/**
 * # Safety
 * `m` must be a live model handle.
 */
bool sp_model_is_complete(const struct SpModel *m);

/**
 * An empty configuration.
 */
struct SpConfig *sp_config_new(size_t dim);

/**
 * Parses a `sandpile-config v1` text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SpStatus sp_config_parse(const char *text_, struct SpConfig **out);

/**
 * # Safety
 * `c` must come from this library or be null.
 */
void sp_config_free(struct SpConfig *c);

/**
 * Sets the count of the cell with `dim` coordinates at `coords`.
 *
 * # Safety
 * `c` must be a live handle and `coords` point to `dim` integers.
 */
enum SpStatus sp_config_set(struct SpConfig *c, const int64_t *coords, size_t dim, uint64_t count);

/**
 * Count of a cell; 0 for a null handle or wrong dimension.
 *
 * # Safety
 * `c` must be a live handle and `coords` point to `dim` integers.
 */
uint64_t sp_config_get(const struct SpConfig *c, const int64_t *coords, size_t dim);

/**
 * Total grains (saturating at `u64::MAX`).
 *
 * # Safety
 * `c` must be a live handle.
 */
uint64_t sp_config_total(const struct SpConfig *c);

/**
 * Serializes to the text format. Release the string with [`sp_string_free`].
 *
 * # Safety
 * `c` must be a live handle and `out` a valid pointer.
 */
enum SpStatus sp_config_to_string(const struct SpConfig *c, char **out);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void sp_string_free(char *s);

/**
 * Stabilizes `c`; writes a new handle to `out` and the number of topplings to `topplings`
 * (which may be null).
 *
 * # Safety
 * Handles must be live; `out` must be valid.
 */
enum SpStatus sp_stabilize(const struct SpModel *m,
                           const struct SpConfig *c,
                           enum SpPolicy policy,
                           uint64_t seed,
                           struct SpConfig **out,
                           uint64_t *topplings);

/**
 * Does `target` topple when `c` stabilizes (`addition` null), or when a grain is added at
 * `addition` to the stable `c`?
 *
 * # Safety
 * Handles must be live; coordinate pointers hold the model dimension or are null.
 */
enum SpStatus sp_predict(const struct SpModel *m,
                         const struct SpConfig *c,
                         const int64_t *target,
                         const int64_t *addition,
                         bool *answer);

/**
 * First-column prediction in one dimension; `parallel` selects the tree algorithm.
 *
 * # Safety
 * Handles must be live and `answer` valid.
 */
enum SpStatus sp_predict_first_col_1d(const struct SpModel *m,
                                      const struct SpConfig *c,
                                      int64_t target,
                                      bool parallel,
                                      bool *answer);

/**
 * Parses a `circuit v1` text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` valid.
 */
enum SpStatus sp_circuit_parse(const char *text_, struct SpCircuit **out);

/**
 * # Safety
 * `c` must come from this library or be null.
 */
void sp_circuit_free(struct SpCircuit *c);

/**
 * Direct evaluation.
 *
 * # Safety
 * `c` must be live and `answer` valid.
 */
enum SpStatus sp_circuit_eval(const struct SpCircuit *c, bool *answer);

/**
 * Compiles into `m` and runs the avalanche; `answer` is the toppling of the question cell.
 * `out` (may be null) receives the compiled configuration.
 *
 * # Safety
 * Handles must be live and `answer` valid.
 */
enum SpStatus sp_circuit_run(const struct SpCircuit *c,
                             const struct SpModel *m,
                             bool *answer,
                             struct SpConfig **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SANDPILE_H */
