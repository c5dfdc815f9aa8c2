/* C interface to the electroconvection simulation library. */

#ifndef ELECTROCONVECTION_H
#define ELECTROCONVECTION_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes; nonzero mirrors the CLI exit codes where applicable.
 */
typedef enum EcsimStatus {
  EcsimStatus_Ok = 0,
  EcsimStatus_DiagnosticFailure = 1,
  EcsimStatus_InvalidConfig = 2,
  EcsimStatus_Blowup = 3,
  EcsimStatus_NullPointer = 4,
  EcsimStatus_InvalidUtf8 = 5,
  EcsimStatus_IoError = 6,
  EcsimStatus_Internal = 7,
} EcsimStatus;

/**
 * Parsed, validated run configuration.
 */
typedef struct EcsimConfig EcsimConfig;

/**
 * A completed run: trajectory, diagnostic table, verdict.
 */
typedef struct EcsimRun EcsimRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Crate version as a static string; do not free.
 */
const char *ecsim_version(void);

/**
 * Message describing the last failure on this thread; valid until the
 * next failing call on the same thread. Do not free.
 */
const char *ecsim_last_error(void);

/**
 * Releases a string allocated by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by an ecsim function that
 * documents `ecsim_string_free`, and not freed before.
 */
void ecsim_string_free(char *s);

/**
 * Parses a JSON run configuration. On success writes a new handle to
 * `out`; release it with `ecsim_config_free`.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid
 * pointer.
 */
enum EcsimStatus ecsim_config_parse(const char *json, struct EcsimConfig **out);

/**
 * # Safety
 * `cfg` must come from `ecsim_config_parse` and not be freed twice.
 */
void ecsim_config_free(struct EcsimConfig *cfg);

/**
 * Canonical SHA-256 hash of the configuration, hex-encoded; release
 * with `ecsim_string_free`.
 *
 * # Safety
 * `cfg` must be a live handle from `ecsim_config_parse`.
 */
char *ecsim_config_hash(const struct EcsimConfig *cfg);

/**
 * Integrates the configured problem and evaluates its diagnostics.
 * On success writes a run handle to `out`; release it with
 * `ecsim_run_free`. Returns `DiagnosticFailure` (with a valid handle)
 * when the verdict contains failing entries.
 *
 * # Safety
 * `cfg` must be a live config handle and `out` a valid pointer.
 */
enum EcsimStatus ecsim_run_execute(const struct EcsimConfig *cfg, struct EcsimRun **out);

/**
 * # Safety
 * `run` must come from `ecsim_run_execute` and not be freed twice.
 */
void ecsim_run_free(struct EcsimRun *run);

/**
 * Number of stored snapshots.
 *
 * # Safety
 * `run` must be a live run handle.
 */
size_t ecsim_run_snapshot_count(const struct EcsimRun *run);

/**
 * Time of snapshot `index`; writes into `out`.
 *
 * # Safety
 * `run` must be a live run handle and `out` a valid pointer.
 */
enum EcsimStatus ecsim_run_time(const struct EcsimRun *run, size_t index, double *out);

/**
 * L² norm of snapshot `index`; writes into `out`.
 *
 * # Safety
 * `run` must be a live run handle and `out` a valid pointer.
 */
enum EcsimStatus ecsim_run_l2_norm(const struct EcsimRun *run, size_t index, double *out);

/**
 * 1 when the verdict contains failing entries, else 0.
 *
 * # Safety
 * `run` must be a live run handle.
 */
int32_t ecsim_run_failed(const struct EcsimRun *run);

/**
 * Verdict report as JSON; release with `ecsim_string_free`.
 *
 * # Safety
 * `run` must be a live run handle.
 */
char *ecsim_run_verdict_json(const struct EcsimRun *run);

/**
 * Diagnostic series as CSV text; release with `ecsim_string_free`.
 *
 * # Safety
 * `run` must be a live run handle.
 */
char *ecsim_run_series_csv(const struct EcsimRun *run);

/**
 * Writes config.json, series.csv, verdict.json and the snapshot files
 * into `dir` (created if needed), the same layout as the CLI.
 *
 * # Safety
 * `run` must be a live run handle; `dir` a valid NUL-terminated path.
 */
enum EcsimStatus ecsim_run_write_outputs(const struct EcsimRun *run, const char *dir);

/**
 * Runs the built-in check suite; `Ok` when every check passes.
 */
enum EcsimStatus ecsim_selftest(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELECTROCONVECTION_H */
