#ifndef GRIDLOCAL_H
#define GRIDLOCAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GlStatus {
  GL_STATUS_OK = 0,
  GL_STATUS_NULL_POINTER = 1,
  GL_STATUS_INVALID_UTF8 = 2,
  GL_STATUS_INVALID_CONFIG = 3,
  GL_STATUS_BUDGET_EXHAUSTED = 4,
  GL_STATUS_INTERNAL = 5,
  GL_STATUS_TRANSCRIPT = 6,
  GL_STATUS_VERIFY_FAILED = 7,
  GL_STATUS_PANIC = 8,
} GlStatus;

/**
 * Finished match.
 */
typedef struct GlMatch GlMatch;

/**
 * Match parameters. `theta_dy / theta_dx` is the slope.
 */
typedef struct GlParams {
  uint32_t t;
  uint32_t kappa;
  uint64_t l0;
  uint64_t l1;
  uint64_t budget;
  int64_t theta_dy;
  int64_t theta_dx;
  uint32_t trials;
  /**
   * Nonzero enables the coordinate backdoor.
   */
  uint8_t backdoor;
} GlParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The desk-scale defaults.
 */
struct GlParams gl_params_default(void);

/**
 * Message of the last failure on this thread. Valid until the next call
 * into the library from the same thread.
 */
const char *gl_last_error(void);

/**
 * Plays one match and stores the handle in `*out`.
 *
 * # Safety
 * `strategy` and `algo` must be NUL-terminated strings, `params` and `out`
 * valid pointers.
 */
enum GlStatus gl_run(const char *strategy,
                     const char *algo,
                     const struct GlParams *params,
                     uint64_t seed,
                     struct GlMatch **out);

/**
 * 1 if the adversary won, 0 if the algorithm survived, 2 if the budget ran
 * out, -1 on a null handle.
 *
 * # Safety
 * `m` must be null or a handle from [`gl_run`].
 */
int32_t gl_match_outcome(const struct GlMatch *m);

/**
 * Cells charged to the budget.
 *
 * # Safety
 * `m` must be null or a handle from [`gl_run`].
 */
uint64_t gl_match_spent(const struct GlMatch *m);

/**
 * Largest |p| the adversary observed.
 *
 * # Safety
 * `m` must be null or a handle from [`gl_run`].
 */
int64_t gl_match_peak_potential(const struct GlMatch *m);

/**
 * Certificate kind ("improper_edge", "potential_violation", "survived").
 *
 * # Safety
 * `m` must be a handle from [`gl_run`]; `out` a valid pointer. The string
 * is freed with [`gl_string_free`].
 */
enum GlStatus gl_match_certificate(const struct GlMatch *m, char **out);

/**
 * The transcript as JSON lines.
 *
 * # Safety
 * As for [`gl_match_certificate`].
 */
enum GlStatus gl_match_transcript(const struct GlMatch *m, char **out);

/**
 * Re-checks a JSON-lines transcript. On a failed check the offending
 * event index goes to `*bad_event` (if not null), otherwise -1.
 *
 * # Safety
 * `jsonl` must be a NUL-terminated string; `bad_event` null or valid.
 */
enum GlStatus gl_verify_jsonl(const char *jsonl, int64_t *bad_event);

/**
 * # Safety
 * `m` must be null or a handle from [`gl_run`] not freed before.
 */
void gl_match_free(struct GlMatch *m);

/**
 * # Safety
 * `s` must be null or a string returned by this library not freed before.
 */
void gl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRIDLOCAL_H */
