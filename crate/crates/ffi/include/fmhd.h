#ifndef FMHD_H
#define FMHD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum FmhdStatus {
  FMHD_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  FMHD_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  FMHD_STATUS_INVALID_UTF8 = 2,
  /**
   * Out-of-range parameter, unknown name, or malformed input data.
   */
  FMHD_STATUS_INVALID_ARGUMENT = 3,
  /**
   * Configuration document or override rejected.
   */
  FMHD_STATUS_CONFIG = 4,
  /**
   * File system or checkpoint format failure.
   */
  FMHD_STATUS_IO = 5,
  /**
   * Non-finite values, broken invariants, or blow-up.
   */
  FMHD_STATUS_NUMERICAL = 6,
  /**
   * A bug in the library; the message has details.
   */
  FMHD_STATUS_INTERNAL = 7,
} FmhdStatus;

/**
 * Verdict of a run; matches the CLI exit status.
 */
typedef enum FmhdOutcome {
  FMHD_OUTCOME_PASS = 0,
  FMHD_OUTCOME_THRESHOLD_FAILURE = 1,
  FMHD_OUTCOME_BLOW_UP = 2,
} FmhdOutcome;

/**
 * Field selector for per-field queries.
 */
typedef enum FmhdField {
  FMHD_FIELD_VELOCITY = 0,
  FMHD_FIELD_MAGNETIC = 1,
  FMHD_FIELD_MAGNETISATION = 2,
} FmhdField;

/**
 * Validated simulation configuration.
 */
typedef struct FmhdConfig FmhdConfig;

/**
 * A finished simulation with its diagnostics.
 */
typedef struct FmhdRun FmhdRun;

/**
 * One `(v, B, m)` state.
 */
typedef struct FmhdState FmhdState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *fmhd_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fmhd_version(void);

/**
 * Parses a TOML config document, then applies `n_overrides` `key=value`
 * strings. `overrides` may be null when `n_overrides` is 0.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `overrides` must point to
 * `n_overrides` NUL-terminated strings; `out` must be writable.
 */
enum FmhdStatus fmhd_config_parse(const char *text,
                                  const char *const *overrides,
                                  size_t n_overrides,
                                  struct FmhdConfig **out);

/**
 * Flat dotted-key text of the config, which parses back to an equal config.
 * The returned string must be released with [`fmhd_string_free`].
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum FmhdStatus fmhd_config_emit(const struct FmhdConfig *config, char **out);

/**
 * # Safety
 * `config` must be null or a handle from [`fmhd_config_parse`] not yet freed.
 */
void fmhd_config_free(struct FmhdConfig *config);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void fmhd_string_free(char *s);

/**
 * Runs the configured simulation. With a non-null `output_dir`, writes the
 * diagnostics CSV, checkpoints and summary there. Blow-up is a successful
 * call whose outcome is `FMHD_OUTCOME_BLOW_UP`.
 *
 * # Safety
 * `config` must be a live handle; `output_dir` null or NUL-terminated;
 * `out` writable.
 */
enum FmhdStatus fmhd_run(const struct FmhdConfig *config,
                         const char *output_dir,
                         struct FmhdRun **out);

/**
 * # Safety
 * `run` must be null or a handle from [`fmhd_run`] not yet freed.
 */
void fmhd_run_free(struct FmhdRun *run);

/**
 * # Safety
 * `run` must be a live handle.
 */
enum FmhdOutcome fmhd_run_outcome(const struct FmhdRun *run);

/**
 * Completed steps.
 *
 * # Safety
 * `run` must be a live handle.
 */
size_t fmhd_run_steps(const struct FmhdRun *run);

/**
 * Last valid time before blow-up, or NaN when the run completed.
 *
 * # Safety
 * `run` must be a live handle.
 */
double fmhd_run_blow_up_time(const struct FmhdRun *run);

/**
 * Number of recorded diagnostics rows.
 *
 * # Safety
 * `run` must be a live handle.
 */
size_t fmhd_run_rows(const struct FmhdRun *run);

/**
 * One diagnostics value by CSV column name (`"time"`, `"J"`,
 * `"unit_drift_m"`, ...).
 *
 * # Safety
 * `run` must be a live handle, `column` NUL-terminated, `out` writable.
 */
enum FmhdStatus fmhd_run_value(const struct FmhdRun *run,
                               size_t row,
                               const char *column,
                               double *out);

/**
 * Writes the diagnostics CSV to `path`.
 *
 * # Safety
 * `run` must be a live handle and `path` NUL-terminated.
 */
enum FmhdStatus fmhd_run_write_csv(const struct FmhdRun *run, const char *path);

/**
 * Copy of the last valid state of the run.
 *
 * # Safety
 * `run` must be a live handle; `out` writable.
 */
enum FmhdStatus fmhd_run_final_state(const struct FmhdRun *run, struct FmhdState **out);

/**
 * The configured initial data (random state projected onto the truncation).
 *
 * # Safety
 * `config` must be a live handle; `out` writable.
 */
enum FmhdStatus fmhd_state_initial(const struct FmhdConfig *config, struct FmhdState **out);

/**
 * Reads a checkpoint file; the dealias fraction is not stored in the file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` writable.
 */
enum FmhdStatus fmhd_state_read(const char *path, double dealias_fraction, struct FmhdState **out);

/**
 * # Safety
 * `state` must be a live handle and `path` NUL-terminated.
 */
enum FmhdStatus fmhd_state_write(const struct FmhdState *state, const char *path);

/**
 * # Safety
 * `state` must be null or a live handle.
 */
void fmhd_state_free(struct FmhdState *state);

/**
 * # Safety
 * `state` must be a live handle.
 */
double fmhd_state_time(const struct FmhdState *state);

/**
 * Points per axis.
 *
 * # Safety
 * `state` must be a live handle.
 */
size_t fmhd_state_n(const struct FmhdState *state);

/**
 * Sobolev norm of order 0..=3 of one field.
 *
 * # Safety
 * `state` must be a live handle; `out` writable.
 */
enum FmhdStatus fmhd_state_sobolev_norm(const struct FmhdState *state,
                                        enum FmhdField field,
                                        uint32_t order,
                                        double *out);

/**
 * Largest spectral divergence of one field.
 *
 * # Safety
 * `state` must be a live handle; `out` writable.
 */
enum FmhdStatus fmhd_state_divergence_drift(const struct FmhdState *state,
                                            enum FmhdField field,
                                            double *out);

/**
 * `max | |m|² - 1 |` over the collocation points.
 *
 * # Safety
 * `state` must be a live handle; `out` writable.
 */
enum FmhdStatus fmhd_state_unit_drift(const struct FmhdState *state, double *out);

/**
 * Runs the vector-calculus identity suite on an `n³` grid. `worst` receives
 * the largest relative residual and `pass` 1 if every identity passes.
 *
 * # Safety
 * `worst` and `pass` must be writable.
 */
enum FmhdStatus fmhd_identity_suite(size_t n, uint64_t seed, double *worst, int32_t *pass);

/**
 * Gronwall bound at `t` for `g(s) = s^power` and constant `β` on `[a, t]`.
 * `*bound` is NaN and `*out_of_domain` is 1 once `∫β` leaves the range of
 * `G`. `*breakdown` receives the breakdown time of the bound, or infinity
 * when the bound stays finite for all times.
 *
 * # Safety
 * `bound`, `out_of_domain` and `breakdown` must be writable.
 */
enum FmhdStatus fmhd_gronwall_power(double alpha,
                                    double power,
                                    double beta,
                                    double a,
                                    double t,
                                    double *bound,
                                    int32_t *out_of_domain,
                                    double *breakdown);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FMHD_H */
