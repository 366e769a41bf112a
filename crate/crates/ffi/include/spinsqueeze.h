#ifndef SPINSQUEEZE_H
#define SPINSQUEEZE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_NULL_POINTER = 1,
  SS_STATUS_INVALID_UTF8 = 2,
  SS_STATUS_CONFIG = 3,
  SS_STATUS_UNKNOWN_PRESET = 4,
  SS_STATUS_INVALID_ARGUMENT = 5,
  SS_STATUS_NUMERICAL = 6,
  SS_STATUS_NOT_FOUND = 7,
  SS_STATUS_IO = 8,
  SS_STATUS_PANIC = 9,
} SsStatus;

typedef struct SsResult SsResult;

typedef struct SsScenario SsScenario;

typedef struct SsWigner SsWigner;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ss_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ss_version(void);

/**
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum SsStatus ss_scenario_from_preset(const char *name, struct SsScenario **out);

/**
 * Scenario from TOML text in the command-line config format.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum SsStatus ss_scenario_from_toml(const char *toml, struct SsScenario **out);

/**
 * Enables binomial shot noise; `shots == 0` turns it off.
 *
 * # Safety
 * `scn` must come from an `ss_scenario_*` constructor.
 */
enum SsStatus ss_scenario_set_noise(struct SsScenario *scn, uint32_t shots, uint64_t seed);

/**
 * # Safety
 * `scn` must be NULL or come from an `ss_scenario_*` constructor, and is
 * invalid afterwards.
 */
void ss_scenario_free(struct SsScenario *scn);

/**
 * Runs the scenario to completion (seconds to minutes).
 *
 * # Safety
 * `scn` must be a live scenario handle; `out` must be writable.
 */
enum SsStatus ss_run(const struct SsScenario *scn, struct SsResult **out);

/**
 * Summary quantity by name; `sigma` may be NULL.
 *
 * # Safety
 * `res` must be a live result handle, `name` NUL-terminated, `value` writable.
 */
enum SsStatus ss_result_quantity(const struct SsResult *res,
                                 const char *name,
                                 double *value,
                                 double *sigma);

/**
 * Whole result as JSON; release the string with `ss_string_free`.
 *
 * # Safety
 * `res` must be a live result handle; `out` must be writable.
 */
enum SsStatus ss_result_json(const struct SsResult *res, char **out);

/**
 * # Safety
 * `res` must be NULL or a result handle, and is invalid afterwards.
 */
void ss_result_free(struct SsResult *res);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void ss_string_free(char *s);

/**
 * W(x, p) from χ sampled on a uniform `n_re × n_im` grid. `chi` holds
 * interleaved (re, im) pairs, row-major with Im β as the slow index.
 *
 * # Safety
 * Arrays must hold `n_re`, `n_im` and `2·n_re·n_im` doubles; `out` must be writable.
 */
enum SsStatus ss_wigner_from_chi(const double *beta_re,
                                 size_t n_re,
                                 const double *beta_im,
                                 size_t n_im,
                                 const double *chi,
                                 size_t pad,
                                 struct SsWigner **out);

/**
 * # Safety
 * `w` must be a live Wigner handle; `nx`, `np` writable.
 */
enum SsStatus ss_wigner_dims(const struct SsWigner *w, size_t *nx, size_t *np);

/**
 * Copies the axes and values (row-major, p slow). Any output may be NULL.
 *
 * # Safety
 * Non-NULL outputs must hold nx, np and nx·np doubles respectively.
 */
enum SsStatus ss_wigner_copy(const struct SsWigner *w, double *x, double *p, double *values);

/**
 * # Safety
 * `w` must be NULL or a Wigner handle, and is invalid afterwards.
 */
void ss_wigner_free(struct SsWigner *w);

/**
 * 10·log₁₀(e^{2r}).
 */
double ss_squeezing_db(double r);

/**
 * Closed-form probe splitting p↓(t) of a squeezed thermal state under a
 * resonant probe of rate `strength` (rad/s) and motional phase `phase`.
 *
 * # Safety
 * `durations` and `p_down` must each hold `n` doubles.
 */
enum SsStatus ss_analytic_splitting(double r,
                                    double theta,
                                    double nbar,
                                    double contrast,
                                    double strength,
                                    double phase,
                                    const double *durations,
                                    size_t n,
                                    double *p_down);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINSQUEEZE_H */
