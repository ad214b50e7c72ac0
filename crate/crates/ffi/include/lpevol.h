#ifndef LPEVOL_H
#define LPEVOL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by all functions.
 */
typedef enum LpevolStatus {
  LPEVOL_STATUS_OK = 0,
  LPEVOL_STATUS_NULL_POINTER = 1,
  LPEVOL_STATUS_INVALID_UTF8 = 2,
  LPEVOL_STATUS_INVALID_SPEC = 3,
  LPEVOL_STATUS_NOT_IN_LP = 4,
  LPEVOL_STATUS_NO_CONVERGENCE = 5,
  LPEVOL_STATUS_INVALID_CONTROL = 6,
  LPEVOL_STATUS_OUT_OF_DOMAIN = 7,
  LPEVOL_STATUS_BUFFER_TOO_SMALL = 8,
  LPEVOL_STATUS_INTERNAL = 9,
} LpevolStatus;

typedef enum LpevolCommand {
  LPEVOL_COMMAND_NORM = 0,
  LPEVOL_COMMAND_EVOLVE = 1,
  LPEVOL_COMMAND_CHECK = 2,
  LPEVOL_COMMAND_CONVERGENCE = 3,
} LpevolCommand;

/**
 * An evolved trajectory.
 */
typedef struct LpevolEvolution LpevolEvolution;

/**
 * A parsed run specification.
 */
typedef struct LpevolSpec LpevolSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *lpevol_last_error(void);

/**
 * Library version as a static string.
 */
const char *lpevol_version(void);

/**
 * Parses a JSON run specification into `*out`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LpevolStatus lpevol_spec_from_json(const char *json, struct LpevolSpec **out);

/**
 * Parses a TOML run specification into `*out`.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LpevolStatus lpevol_spec_from_toml(const char *toml, struct LpevolSpec **out);

/**
 * # Safety
 * `spec` must be null or a handle from `lpevol_spec_from_*` not yet freed.
 */
void lpevol_spec_free(struct LpevolSpec *spec);

/**
 * Evolves the spec's control into `*out`.
 *
 * # Safety
 * `spec` must be a live spec handle and `out` a valid pointer.
 */
enum LpevolStatus lpevol_evolve(const struct LpevolSpec *spec, struct LpevolEvolution **out);

/**
 * # Safety
 * `evo` must be null or a handle from `lpevol_evolve` not yet freed.
 */
void lpevol_evolution_free(struct LpevolEvolution *evo);

/**
 * Side length `n` of the matrices in the trajectory; 0 for null.
 *
 * # Safety
 * `evo` must be null or a live evolution handle.
 */
size_t lpevol_evolution_dim(const struct LpevolEvolution *evo);

/**
 * Writes `η(t)` row-major into `out[0..n*n]`.
 *
 * # Safety
 * `evo` must be a live evolution handle and `out` must have room for `len`
 * doubles.
 */
enum LpevolStatus lpevol_evolution_eval(const struct LpevolEvolution *evo,
                                        double t,
                                        double *out,
                                        size_t len);

/**
 * Residual `‖δ(η) - γ‖_{L^1}` of the computed trajectory.
 *
 * # Safety
 * `evo` must be null or a live evolution handle.
 */
double lpevol_evolution_residual(const struct LpevolEvolution *evo);

/**
 * Runs a batch command as the command-line tool would, writing output
 * files under `out_dir` (null for the spec's `output.dir`). The JSON
 * report goes to `*report` (free with `lpevol_string_free`) and the
 * tool's exit code to `*exit_code`.
 *
 * # Safety
 * `spec` must be a live spec handle, `out_dir` null or a NUL-terminated
 * string, `report` and `exit_code` valid pointers.
 */
enum LpevolStatus lpevol_run(const struct LpevolSpec *spec,
                             enum LpevolCommand command,
                             const char *out_dir,
                             bool deterministic,
                             char **report,
                             int32_t *exit_code);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void lpevol_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LPEVOL_H */
