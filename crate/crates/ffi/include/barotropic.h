#ifndef BAROTROPIC_H
#define BAROTROPIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes of every fallible call.
 */
typedef enum BpStatus {
  BP_STATUS_OK = 0,
  BP_STATUS_NULL_POINTER = 1,
  BP_STATUS_INVALID_ARGUMENT = 2,
  BP_STATUS_PARSE = 3,
  BP_STATUS_VALIDATION = 4,
  BP_STATUS_GRID_MISMATCH = 5,
  BP_STATUS_CFL = 6,
  BP_STATUS_VACUUM = 7,
  BP_STATUS_NON_FINITE = 8,
  BP_STATUS_IO = 9,
  BP_STATUS_PANIC = 10,
  BP_STATUS_OTHER = 11,
} BpStatus;

/**
 * Parsed and validated experiment file.
 */
typedef struct BpExperiment BpExperiment;

/**
 * Sampled scalar or vector field.
 */
typedef struct BpField BpField;

/**
 * Littlewood-Paley filter bank on a grid.
 */
typedef struct BpFilterBank BpFilterBank;

/**
 * Periodic grid on `[0, 2 pi)^dim`.
 */
typedef struct BpGrid BpGrid;

/**
 * Result of a nonlinear run.
 */
typedef struct BpRun BpRun;

/**
 * Norms of the state at one stored time.
 */
typedef struct BpRecord {
  double t;
  double a_norm;
  double u_norm;
  double v1_norm;
  double mass;
  double inf_one_plus_a;
  double kinetic;
  double potential;
} BpRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *bp_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bp_version(void);

/**
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum BpStatus bp_grid_new(size_t dim, size_t n, struct BpGrid **out);

/**
 * Number of points of the grid, or 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live grid handle.
 */
size_t bp_grid_len(const struct BpGrid *grid);

/**
 * # Safety
 * `grid` must be null or a handle from `bp_grid_new` not yet freed.
 */
void bp_grid_free(struct BpGrid *grid);

/**
 * Field from `len = components * grid points` values, component-major.
 *
 * # Safety
 * `values` must point to `len` doubles; `out` must be writable.
 */
enum BpStatus bp_field_from_values(const struct BpGrid *grid,
                                   size_t components,
                                   const double *values,
                                   size_t len,
                                   struct BpField **out);

/**
 * Number of values of the field, or 0 for a null handle.
 *
 * # Safety
 * `field` must be null or a live field handle.
 */
size_t bp_field_len(const struct BpField *field);

/**
 * Copies the values into `out`, which holds `len` doubles.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum BpStatus bp_field_values(const struct BpField *field, double *out, size_t len);

/**
 * # Safety
 * `field` must be null or a live field handle.
 */
void bp_field_free(struct BpField *field);

/**
 * Filter bank with ratio `alpha` in `(1, 4/3)`.
 *
 * # Safety
 * `grid` must be a live grid handle; `out` must be writable.
 */
enum BpStatus bp_filter_bank_new(const struct BpGrid *grid,
                                 double alpha,
                                 struct BpFilterBank **out);

/**
 * # Safety
 * `bank` must be null or a live filter bank handle.
 */
void bp_filter_bank_free(struct BpFilterBank *bank);

/**
 * `|field|_{B^s_{p,r}}`; pass `INFINITY` for infinite exponents.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum BpStatus bp_besov_norm(const struct BpFilterBank *bank,
                            const struct BpField *field,
                            double s,
                            double p,
                            double r,
                            double *out);

/**
 * Parses experiment text in the command line file format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum BpStatus bp_experiment_parse(const char *text, struct BpExperiment **out);

/**
 * # Safety
 * `exp` must be null or a live experiment handle.
 */
void bp_experiment_free(struct BpExperiment *exp);

/**
 * Runs the nonlinear solver. A run stopped early (vacuum, CFL) still
 * yields a handle; its stop reason is in `bp_run_status`.
 *
 * # Safety
 * `exp` must be live; `out` must be writable.
 */
enum BpStatus bp_simulate(const struct BpExperiment *exp, struct BpRun **out);

/**
 * `BP_STATUS_OK` when the run reached its horizon, else the stop reason
 * (also set as the last error message).
 *
 * # Safety
 * `run` must be a live run handle.
 */
enum BpStatus bp_run_status(const struct BpRun *run);

/**
 * Number of stored records, or 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live run handle.
 */
size_t bp_run_record_count(const struct BpRun *run);

/**
 * # Safety
 * `run` must be live; `out` must be writable.
 */
enum BpStatus bp_run_record(const struct BpRun *run, size_t index, struct BpRecord *out);

/**
 * Whether every monitored hypothesis held at every stored time, and whether
 * the continuation criteria hold.
 *
 * # Safety
 * `run` must be live; the flags must be writable.
 */
enum BpStatus bp_run_verdict(const struct BpRun *run, bool *all_green, bool *continuable);

/**
 * # Safety
 * `run` must be null or a live run handle.
 */
void bp_run_free(struct BpRun *run);

/**
 * Runs one verification suite by name with the default sizes and `seed`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `passed` must be writable.
 */
enum BpStatus bp_verify_suite(const char *name, uint64_t seed, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BAROTROPIC_H */
