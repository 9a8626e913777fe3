#ifndef LIECG_H
#define LIECG_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LiecgPivot {
  LIECG_PIVOT_SMALLEST = 0,
  LIECG_PIVOT_FIRST = 1,
} LiecgPivot;

typedef enum LiecgStatus {
  LIECG_STATUS_OK = 0,
  LIECG_STATUS_NULL_POINTER = 1,
  LIECG_STATUS_INVALID_UTF8 = 2,
  LIECG_STATUS_UNKNOWN_GROUP = 3,
  LIECG_STATUS_UNKNOWN_IRREP = 4,
  /**
   * An irrep of the series has no catalog label.
   */
  LIECG_STATUS_UNLABELED = 5,
  /**
   * The decomposition or a phase convention failed.
   */
  LIECG_STATUS_COMPUTATION = 6,
  LIECG_STATUS_OUT_OF_RANGE = 7,
  LIECG_STATUS_PANIC = 8,
} LiecgStatus;

/**
 * Opaque scalar-factor table.
 */
typedef struct LiecgTable LiecgTable;

/**
 * A coefficient as its sign (-1, 0, 1) and magnitude.
 */
typedef struct LiecgCoefficient {
  int32_t sign;
  double value;
} LiecgCoefficient;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *liecg_last_error(void);

/**
 * Pivot choice for exact elimination (process-wide; results do not depend on it).
 */
void liecg_set_pivot(enum LiecgPivot p);

/**
 * Computes the exact scalar-factor table of `r1 x r2` in `group`
 * ("SU3", "SU4", "SU6", "SU8").
 *
 * # Safety
 * The strings must be null or NUL-terminated; `out` must be null or writable.
 */
enum LiecgStatus liecg_sf_table(const char *group,
                                const char *r1,
                                const char *r2,
                                struct LiecgTable **out);

/**
 * # Safety
 * `t` must be null or a handle from [`liecg_sf_table`] not yet freed.
 */
void liecg_table_free(struct LiecgTable *t);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void liecg_string_free(char *s);

/**
 * The table as JSON (same bytes as the command-line tool).
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum LiecgStatus liecg_table_json(const struct LiecgTable *t, char **out);

/**
 * The table in the line-oriented golden-file format.
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum LiecgStatus liecg_table_text(const struct LiecgTable *t, char **out);

/**
 * Number of rows (coupled states).
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t liecg_table_rows(const struct LiecgTable *t);

/**
 * Label `R_sigma;mu_gamma`, exchange sign and column count of row `i`.
 *
 * # Safety
 * `t` must be a live handle; each output must be null or writable.
 */
enum LiecgStatus liecg_table_row(const struct LiecgTable *t,
                                 size_t i,
                                 char **label,
                                 int32_t *xi,
                                 size_t *cols);

/**
 * Column `j` of row `i`: particle-pair label, exact value as
 * `+sqrt(p/q)` text, and its sign and magnitude.
 *
 * # Safety
 * `t` must be a live handle; each output must be null or writable.
 */
enum LiecgStatus liecg_table_coefficient(const struct LiecgTable *t,
                                         size_t i,
                                         size_t j,
                                         char **label,
                                         char **exact,
                                         struct LiecgCoefficient *value);

/**
 * Subgroup content of a spin-flavor irrep ("SU6", "56" gives "8_2 10_4").
 *
 * # Safety
 * The strings must be NUL-terminated and `out` writable.
 */
enum LiecgStatus liecg_decompose(const char *group, const char *irrep, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIECG_H */
