#ifndef BM_MOMENT_H
#define BM_MOMENT_H

/* Generated by cbindgen from bm-moment-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes of every fallible call. `BM_STATUS_OK` is zero; the
 * run-specific codes mirror the CLI exit contract.
 */
typedef enum BmStatus {
  BM_STATUS_OK = 0,
  BM_STATUS_CHECK_FAILED = 1,
  BM_STATUS_INVALID_INPUT = 2,
  BM_STATUS_VALIDATION_FAILED = 3,
  BM_STATUS_NULL_POINTER = 4,
  BM_STATUS_PANIC_CAUGHT = 5,
} BmStatus;

/**
 * Opaque scenario handle.
 */
typedef struct BmScenario BmScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string (do not free).
 */
const char *bm_version(void);

/**
 * Most recent error message on this thread, or null. Free the result with
 * [`bm_string_free`].
 */
char *bm_last_error_message(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string returned by this library that has not been freed.
 */
void bm_string_free(char *s);

/**
 * Parses a scenario from JSON text. Returns null on error (see
 * [`bm_last_error_message`]).
 *
 * # Safety
 * `json` must be null or point to a NUL-terminated string.
 */
struct BmScenario *bm_scenario_load_json(const char *json);

/**
 * Loads a scenario from a file path or bundled scenario name. Returns null
 * on error.
 *
 * # Safety
 * `path` must be null or point to a NUL-terminated string.
 */
struct BmScenario *bm_scenario_load_path(const char *path);

/**
 * Releases a scenario handle.
 *
 * # Safety
 * `scenario` must be null or a handle from a load call that has not been freed.
 */
void bm_scenario_free(struct BmScenario *scenario);

/**
 * Scenario name; free with [`bm_string_free`].
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
char *bm_scenario_name(const struct BmScenario *scenario);

/**
 * Validates the standing assumptions of the model.
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
enum BmStatus bm_scenario_validate(const struct BmScenario *scenario);

/**
 * Runs the scenario into `out_dir` (clouds, hulls and report.json) and
 * returns the run exit code: 0 all checks passed, 1 check failure,
 * 2 input/IO error, 3 validation failure.
 *
 * # Safety
 * `scenario` must be null or a live handle; `out_dir` must be null or NUL-terminated.
 */
int32_t bm_scenario_run(const struct BmScenario *scenario, const char *out_dir);

/**
 * Divergence scale of the desingularized moment image at smoothing width
 * `eps`.
 *
 * # Safety
 * `scenario` must be null or a live handle; `out` must be null or valid for one write.
 */
enum BmStatus bm_scenario_a_eps(const struct BmScenario *scenario, double eps, double *out);

/**
 * Singular moment map value: `leaf` must hold `d - 1` coordinates of a
 * point inside the leaf polytope, `out` must hold `d` slots.
 *
 * # Safety
 * `leaf` must point to `leaf_len` readable doubles (or be null with `leaf_len` 0); `out` must point to `out_len` writable doubles.
 */
enum BmStatus bm_scenario_moment_eval(const struct BmScenario *scenario,
                                      double x_or_theta,
                                      const double *leaf,
                                      uintptr_t leaf_len,
                                      double *out,
                                      uintptr_t out_len);

/**
 * Desingularized replacement density for `x^-m` at smoothing width `eps`.
 *
 * # Safety
 * `out` must be null or valid for one write.
 */
enum BmStatus bm_desing_density(uint32_t m, double eps, double x, double *out);

/**
 * Desingularized moment primitive `int_0^x sum_j w_j q_eps^(j)`.
 *
 * # Safety
 * `weights` must point to `weights_len` readable doubles; `out` must be null or valid for one write.
 */
enum BmStatus bm_desing_primitive(double eps,
                                  const double *weights,
                                  uintptr_t weights_len,
                                  double x,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BM_MOMENT_H */
