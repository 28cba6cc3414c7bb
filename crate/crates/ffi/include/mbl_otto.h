#ifndef MBL_OTTO_H
#define MBL_OTTO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum MblStatus {
  MBL_STATUS_OK = 0,
  MBL_STATUS_NULL_POINTER = 1,
  MBL_STATUS_INVALID_ARGUMENT = 2,
  MBL_STATUS_NUMERIC = 3,
  MBL_STATUS_STATISTICS = 4,
  MBL_STATUS_RESOURCE = 5,
  MBL_STATUS_STATE = 6,
  MBL_STATUS_DOMAIN = 7,
  MBL_STATUS_SINGULARITY = 8,
  MBL_STATUS_FAILURE_THRESHOLD = 9,
  MBL_STATUS_IO = 10,
  MBL_STATUS_PANIC = 11,
} MblStatus;

/**
 * Engine variant selector.
 */
typedef enum MblVariant {
  MBL_VARIANT_STANDARD = 0,
  MBL_VARIANT_EQUAL_DISORDER = 1,
  MBL_VARIANT_BANDWIDTH = 2,
} MblVariant;

/**
 * Opaque ensemble result.
 */
typedef struct MblEnsembleResult MblEnsembleResult;

/**
 * Opaque ensemble configuration.
 */
typedef struct MblRunConfig MblRunConfig;

/**
 * Disorder-averaged values at one grid point. Standard errors are NaN when
 * undefined; `eta` is NaN when the mean of Q4 is not positive.
 */
typedef struct MblGridPoint {
  double wb;
  double beta_c;
  double beta_h;
  double speed;
  size_t realizations;
  double w1;
  double q2;
  double w3;
  double q4;
  double w_tot;
  double w_tot_stderr;
  double eta;
  double eta_stderr;
} MblGridPoint;

typedef struct MblPredictionInput {
  double wb;
  /**
   * May be INFINITY.
   */
  double beta_c;
  double beta_h;
  double mean_gap;
  size_t sites;
  double eps;
} MblPredictionInput;

typedef struct MblPrediction {
  double q2;
  double q2_leading;
  double q4;
  double w_tot;
  double eta;
  double eta_hot_corrected;
  /**
   * 1 when every regime condition holds.
   */
  int32_t regime_ok;
} MblPrediction;

typedef struct MblPowerInput {
  double eps_ev;
  size_t subengine_sites;
  double pitch_nm;
  double wb_fraction;
} MblPowerInput;

typedef struct MblPowerEstimate {
  double mean_gap_ev;
  double wb_ev;
  double tau_cycle_s;
  double power_w;
  double power_density_w_per_m3;
} MblPowerEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *mbl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mbl_version(void);

/**
 * New configuration with defaults (h: 2 to 20, W_b = <delta>/16, beta_C = inf,
 * beta_H = 0, adiabatic, standard engine).
 *
 * # Safety
 * `out` must be a valid pointer; the handle is released with [`mbl_run_config_free`].
 */
enum MblStatus mbl_run_config_new(size_t sites,
                                  size_t realizations,
                                  uint64_t master_seed,
                                  struct MblRunConfig **out);

/**
 * Parses a configuration from the JSON form echoed in artifacts.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MblStatus mbl_run_config_from_json(const char *json, struct MblRunConfig **out);

/**
 * # Safety
 * `config` must come from this library and not be used afterwards. NULL is ignored.
 */
void mbl_run_config_free(struct MblRunConfig *config);

/**
 * Sets the disorder strengths at the two ends of the tuning.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum MblStatus mbl_run_config_set_disorder(struct MblRunConfig *config, double h_eth, double h_mbl);

/**
 * Sets the cycle: W_b as a fraction of the mean gap, bath inverse
 * temperatures (beta_c may be INFINITY) and tuning speed (0 = adiabatic).
 *
 * # Safety
 * `config` must be a live handle.
 */
enum MblStatus mbl_run_config_set_cycle(struct MblRunConfig *config,
                                        double wb_fraction,
                                        double beta_c,
                                        double beta_h,
                                        double speed);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum MblStatus mbl_run_config_set_variant(struct MblRunConfig *config, enum MblVariant variant);

/**
 * Runs the ensemble on `threads` workers (0: all cores).
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer; the result is
 * released with [`mbl_result_free`].
 */
enum MblStatus mbl_run_ensemble(const struct MblRunConfig *config,
                                size_t threads,
                                struct MblEnsembleResult **out);

/**
 * # Safety
 * `result` must come from this library and not be used afterwards. NULL is ignored.
 */
void mbl_result_free(struct MblEnsembleResult *result);

/**
 * Number of grid points, or 0 for NULL.
 *
 * # Safety
 * `result` must be a live handle or NULL.
 */
size_t mbl_result_len(const struct MblEnsembleResult *result);

/**
 * Ensemble mean gap, or NaN for NULL.
 *
 * # Safety
 * `result` must be a live handle or NULL.
 */
double mbl_result_mean_gap(const struct MblEnsembleResult *result);

/**
 * Copies grid point `index` into `out`.
 *
 * # Safety
 * `result` must be a live handle and `out` a valid pointer.
 */
enum MblStatus mbl_result_point(const struct MblEnsembleResult *result,
                                size_t index,
                                struct MblGridPoint *out);

/**
 * Full summary as JSON; release with [`mbl_string_free`].
 *
 * # Safety
 * `result` must be a live handle and `out` a valid pointer.
 */
enum MblStatus mbl_result_to_json(const struct MblEnsembleResult *result, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. NULL is ignored.
 */
void mbl_string_free(char *s);

/**
 * Closed-form work, heat and efficiency of the adiabatic engine.
 *
 * # Safety
 * `input` and `out` must be valid pointers.
 */
enum MblStatus mbl_predict_cycle(const struct MblPredictionInput *input, struct MblPrediction *out);

/**
 * Fills `out` with the phosphorus-in-silicon platform parameters.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MblStatus mbl_power_input_si_p(struct MblPowerInput *out);

/**
 * Order-of-magnitude power of a platform.
 *
 * # Safety
 * `input` and `out` must be valid pointers.
 */
enum MblStatus mbl_power_estimate(const struct MblPowerInput *input, struct MblPowerEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MBL_OTTO_H */
