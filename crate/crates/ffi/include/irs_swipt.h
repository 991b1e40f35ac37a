#ifndef IRS_SWIPT_H
#define IRS_SWIPT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IrsScheme {
  IRS_SCHEME_HYBRID = 0,
  IRS_SCHEME_PS = 1,
  IRS_SCHEME_TS = 2,
  IRS_SCHEME_TDMA = 3,
  IRS_SCHEME_TDMA_D = 4,
} IrsScheme;

typedef enum IrsStatus {
  IRS_STATUS_OK = 0,
  IRS_STATUS_NULL_POINTER = 1,
  IRS_STATUS_INVALID_ARGUMENT = 2,
  IRS_STATUS_CONFIG = 3,
  IRS_STATUS_SOLVER = 4,
  IRS_STATUS_IO = 5,
  IRS_STATUS_PANIC = 6,
} IrsStatus;

/**
 * Sweep configuration.
 */
typedef struct IrsConfig IrsConfig;

/**
 * One channel realization together with the scenario it was drawn for.
 */
typedef struct IrsInstance IrsInstance;

/**
 * Result of solving one scheme on one instance.
 */
typedef struct IrsOutcome IrsOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call on the same thread.
 */
const char *irs_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *irs_version(void);

/**
 * Default sweep configuration.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IrsStatus irs_config_default(struct IrsConfig **out);

/**
 * Parses a TOML configuration; missing fields take their defaults.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` valid for writes.
 */
enum IrsStatus irs_config_from_toml(const char *toml, struct IrsConfig **out);

/**
 * # Safety
 * `config` must come from this library or be NULL.
 */
void irs_config_free(struct IrsConfig *config);

/**
 * Number of sweep points.
 *
 * # Safety
 * Pointers must be valid.
 */
enum IrsStatus irs_config_point_count(const struct IrsConfig *config, size_t *out);

/**
 * Draws the channels of one (point, trial) pair exactly as a sweep would.
 *
 * # Safety
 * Pointers must be valid.
 */
enum IrsStatus irs_instance_sample(const struct IrsConfig *config,
                                   size_t point,
                                   size_t trial,
                                   struct IrsInstance **out);

/**
 * # Safety
 * `instance` must come from this library or be NULL.
 */
void irs_instance_free(struct IrsInstance *instance);

/**
 * Solves one scheme, given as an `IrsScheme` value. An infeasible instance
 * is not an error: the outcome reports `feasible == false`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum IrsStatus irs_solve(const struct IrsInstance *instance,
                         uint32_t scheme,
                         struct IrsOutcome **out);

/**
 * # Safety
 * `outcome` must come from this library or be NULL.
 */
void irs_outcome_free(struct IrsOutcome *outcome);

/**
 * # Safety
 * Pointers must be valid.
 */
enum IrsStatus irs_outcome_feasible(const struct IrsOutcome *outcome, bool *out);

/**
 * Sum rate in bit/s/Hz, zero when infeasible.
 *
 * # Safety
 * Pointers must be valid.
 */
enum IrsStatus irs_outcome_sum_rate(const struct IrsOutcome *outcome, double *out);

/**
 * Outer iterations performed.
 *
 * # Safety
 * Pointers must be valid.
 */
enum IrsStatus irs_outcome_iterations(const struct IrsOutcome *outcome, size_t *out);

/**
 * Copies the time fractions into `buf`. `len_out` always receives the
 * number of slots (zero when infeasible); at most `cap` values are written.
 *
 * # Safety
 * `buf` must hold `cap` doubles (may be NULL when `cap` is 0).
 */
enum IrsStatus irs_outcome_tau(const struct IrsOutcome *outcome,
                               double *buf,
                               size_t cap,
                               size_t *len_out);

/**
 * Runs the full sweep, writing the result files into `out_dir`.
 *
 * # Safety
 * `config` must be valid and `out_dir` a NUL-terminated path.
 */
enum IrsStatus irs_run_experiment(const struct IrsConfig *config, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IRS_SWIPT_H */
