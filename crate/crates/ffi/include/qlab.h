#ifndef QLAB_H
#define QLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QlabStatus {
  QLAB_STATUS_OK = 0,
  QLAB_STATUS_NULL_ARGUMENT = 1,
  QLAB_STATUS_INVALID_UTF8 = 2,
  QLAB_STATUS_CONFIG = 3,
  QLAB_STATUS_GRID_GUARD = 4,
  QLAB_STATUS_PARSE = 5,
  QLAB_STATUS_NUMERIC = 6,
  QLAB_STATUS_IO = 7,
  QLAB_STATUS_PANIC = 8,
} QlabStatus;

typedef struct QlabConfig QlabConfig;

/**
 * Cached projector ladders shared by runs.
 */
typedef struct QlabHarness QlabHarness;

typedef struct QlabSummary QlabSummary;

typedef struct QlabSymbol QlabSymbol;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Owned by the library.
 */
const char *qlab_last_error(void);

/**
 * Library version, static storage.
 */
const char *qlab_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void qlab_string_free(char *s);

struct QlabHarness *qlab_harness_new(void);

/**
 * # Safety
 * `h` must come from `qlab_harness_new` or be null.
 */
void qlab_harness_free(struct QlabHarness *h);

/**
 * Parses and validates a JSON run configuration.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QlabStatus qlab_config_from_json(const char *json, struct QlabConfig **out);

/**
 * # Safety
 * `c` must come from `qlab_config_from_json` or be null.
 */
void qlab_config_free(struct QlabConfig *c);

/**
 * Runs the configured suite. A suite whose assertions fail still returns `Ok`; query
 * `qlab_summary_passed`.
 *
 * # Safety
 * Handles must be valid; `out` must be a valid pointer.
 */
enum QlabStatus qlab_run(const struct QlabHarness *h,
                         const struct QlabConfig *cfg,
                         struct QlabSummary **out);

/**
 * # Safety
 * `s` must be a valid summary handle and `passed` a valid pointer.
 */
enum QlabStatus qlab_summary_passed(const struct QlabSummary *s, bool *passed);

/**
 * Counts assertions and failed assertions.
 *
 * # Safety
 * `s` must be a valid summary handle; output pointers must be valid.
 */
enum QlabStatus qlab_summary_counts(const struct QlabSummary *s, size_t *total, size_t *failed);

/**
 * Summary as JSON (`json = true`) or as the one-line-per-assertion text. Free with
 * `qlab_string_free`.
 *
 * # Safety
 * `s` must be a valid summary handle and `out` a valid pointer.
 */
enum QlabStatus qlab_summary_render(const struct QlabSummary *s, bool json, char **out);

/**
 * # Safety
 * `s` must come from `qlab_run` or be null.
 */
void qlab_summary_free(struct QlabSummary *s);

/**
 * Parses a symbol in the record text format.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QlabStatus qlab_symbol_parse(const char *src, struct QlabSymbol **out);

/**
 * Exact product `a ⋆ b`.
 *
 * # Safety
 * Handles must be valid and `out` a valid pointer.
 */
enum QlabStatus qlab_symbol_star(const struct QlabSymbol *a,
                                 const struct QlabSymbol *b,
                                 struct QlabSymbol **out);

/**
 * # Safety
 * Handles must be valid and `equal` a valid pointer.
 */
enum QlabStatus qlab_symbol_equal(const struct QlabSymbol *a,
                                  const struct QlabSymbol *b,
                                  bool *equal);

/**
 * Record text of the symbol; free with `qlab_string_free`.
 *
 * # Safety
 * `s` must be a valid handle and `out` a valid pointer.
 */
enum QlabStatus qlab_symbol_to_string(const struct QlabSymbol *s, char **out);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void qlab_symbol_free(struct QlabSymbol *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QLAB_H */
