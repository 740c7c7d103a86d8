#ifndef PNLINK_H
#define PNLINK_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum PnlStatus {
  PNL_STATUS_OK = 0,
  PNL_STATUS_NULL_POINTER = 1,
  // Argument outside the domain of the operation.
  PNL_STATUS_DOMAIN = 2,
  // Inconsistent inputs (lengths, rates, pilot sets).
  PNL_STATUS_CONTRACT = 3,
  // Non-finite value met during evaluation.
  PNL_STATUS_NUMERICAL = 4,
  // Experiment description could not be parsed.
  PNL_STATUS_CONFIG = 5,
  PNL_STATUS_BUFFER_TOO_SMALL = 6,
  PNL_STATUS_INVALID_UTF8 = 7,
  // A Rust panic was caught at the boundary.
  PNL_STATUS_PANIC = 8,
} PnlStatus;

typedef enum PnlPlanKind {
  PNL_PLAN_KIND_HOMODYNE = 0,
  PNL_PLAN_KIND_HETERODYNE = 1,
} PnlPlanKind;

typedef enum PnlVarianceMethod {
  PNL_VARIANCE_METHOD_NUMERICAL_INTEGRAL = 0,
  PNL_VARIANCE_METHOD_ANALYTIC_APPROX = 1,
} PnlVarianceMethod;

// What [`pnl_results_run_toml`] runs.
typedef enum PnlRunKind {
  // One series for `[plan]` and `experiment.cpe_correction`.
  PNL_RUN_KIND_LINK_SIM = 0,
  // Every plan in `[compare]` with every CPE mode.
  PNL_RUN_KIND_COMPARE = 1,
} PnlRunKind;

typedef enum PnlMetric {
  PNL_METRIC_SNR_DB = 0,
  PNL_METRIC_BER = 1,
  PNL_METRIC_BER_CI95 = 2,
  PNL_METRIC_EVM_PERCENT = 3,
  PNL_METRIC_BITS = 4,
} PnlMetric;

// Opaque phase-noise spectrum.
typedef struct PnlPsd PnlPsd;

// Opaque set of BER/EVM series.
typedef struct PnlResults PnlResults;

// OFDM numerology. `cp_len = 0` is allowed.
typedef struct PnlNumerology {
  size_t n_subcarriers;
  size_t cp_len;
  double delta_f_hz;
  double pilot_fraction;
  size_t qam_order;
} PnlNumerology;

// Frequency plan; `f_if_hz` is ignored for homodyne.
typedef struct PnlPlan {
  enum PnlPlanKind kind;
  double f_rf_hz;
  double f_if_hz;
} PnlPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length of the last error message in bytes, excluding the terminator; 0 if none.
size_t pnl_last_error_length(void);

// Copy the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len - 1` bytes). Returns the full message length.
//
// # Safety
// `buf` must be NULL or point to `len` writable bytes.
size_t pnl_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *pnl_version(void);

// Reference numerology: 256 subcarriers, CP 16, 240 kHz, 1/4 pilots, 64-QAM.
struct PnlNumerology pnl_numerology_default(void);

// Build a spectrum from a level in dBc/Hz at `base_carrier_hz` and
// `n_stages` zero/pole pairs.
//
// # Safety
// `f_zero_hz` and `f_pole_hz` must point to `n_stages` values (may be NULL if
// `n_stages == 0`); `out` must be a valid pointer.
enum PnlStatus pnl_psd_new(double s0_dbchz,
                           double base_carrier_hz,
                           const double *f_zero_hz,
                           const double *f_pole_hz,
                           size_t n_stages,
                           struct PnlPsd **out_psd);

// The built-in representative oscillator.
//
// # Safety
// `out_psd` must be a valid pointer.
enum PnlStatus pnl_psd_representative(struct PnlPsd **out_psd);

// # Safety
// `psd` must be NULL or a handle returned by this library, not yet freed.
void pnl_psd_free(struct PnlPsd *psd);

// One-sided spectrum in rad²/Hz at offset `f_m_hz`.
//
// # Safety
// `psd` must be a live handle and `out_value` a valid pointer.
enum PnlStatus pnl_psd_eval(const struct PnlPsd *psd, double f_m_hz, double *out_value);

// New handle holding the spectrum scaled to carrier `f_c_hz`.
//
// # Safety
// `psd` must be a live handle and `out_psd` a valid pointer.
enum PnlStatus pnl_psd_scale_to_carrier(const struct PnlPsd *psd,
                                        double f_c_hz,
                                        struct PnlPsd **out_psd);

// New handle holding the spectrum after an ideal ×`n_mult` multiplier.
//
// # Safety
// `psd` must be a live handle and `out_psd` a valid pointer.
enum PnlStatus pnl_psd_apply_multiplier(const struct PnlPsd *psd,
                                        uint32_t n_mult,
                                        struct PnlPsd **out_psd);

// Phase variance in rad² over offsets up to `bandwidth_hz / 2`.
//
// # Safety
// `psd` must be a live handle and `out_value` a valid pointer.
enum PnlStatus pnl_psd_integrate_variance(const struct PnlPsd *psd,
                                          double bandwidth_hz,
                                          double *out_value);

// Closed-form variance `n_sample·2π·Δf·s0·(f_c/f_base)²`.
//
// # Safety
// `out_value` must be a valid pointer.
enum PnlStatus pnl_analytic_variance(double s0_ref,
                                     double delta_f_hz,
                                     size_t n_sample,
                                     double f_c_hz,
                                     double f_base_hz,
                                     double *out_value);

// `(f_if / f_rf)²`.
//
// # Safety
// `out_value` must be a valid pointer.
enum PnlStatus pnl_variance_reduction_gamma(double f_if_hz, double f_rf_hz, double *out_value);

// Total phase variance of a plan, every oscillator sharing `psd`.
//
// # Safety
// `psd` must be a live handle; `plan`, `numerology` and `out_value` valid pointers.
enum PnlStatus pnl_plan_variance(const struct PnlPlan *plan,
                                 const struct PnlPsd *psd,
                                 const struct PnlNumerology *numerology,
                                 enum PnlVarianceMethod method,
                                 double *out_value);

// Heterodyne variance on a uniform IF grid of `grid_points` values.
// `out_grid` and `out_variance` must each hold `len >= grid_points` values;
// `out_argmin_if_hz` may be NULL.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum PnlStatus pnl_sweep_if(double f_rf_hz,
                            const struct PnlPsd *psd,
                            const struct PnlNumerology *numerology,
                            size_t grid_points,
                            enum PnlVarianceMethod method,
                            double *out_grid,
                            double *out_variance,
                            size_t len,
                            double *out_argmin_if_hz);

// Fill `out_samples[0..n_samples]` with one phase realization in radians.
//
// # Safety
// `psd` must be a live handle; `out_samples` must hold `len >= n_samples` values.
enum PnlStatus pnl_synthesize(const struct PnlPsd *psd,
                              size_t n_samples,
                              double sample_rate_hz,
                              uint64_t master_seed,
                              uint64_t stream_id,
                              double *out_samples,
                              size_t len);

// Run an experiment described by a TOML document (same schema as the CLI).
//
// # Safety
// `config_toml` must be a NUL-terminated string; `out_results` a valid pointer.
enum PnlStatus pnl_results_run_toml(const char *config_toml,
                                    enum PnlRunKind kind,
                                    struct PnlResults **out_results);

// # Safety
// `results` must be NULL or a handle returned by this library, not yet freed.
void pnl_results_free(struct PnlResults *results);

// Number of series; 0 for a NULL handle.
//
// # Safety
// `results` must be NULL or a live handle.
size_t pnl_results_series_count(const struct PnlResults *results);

// Number of SNR points in series `index`.
//
// # Safety
// `results` must be a live handle and `out_count` a valid pointer.
enum PnlStatus pnl_results_snr_count(const struct PnlResults *results,
                                     size_t index,
                                     size_t *out_count);

// Plan and CPE mode of series `index`.
//
// # Safety
// `results` must be a live handle; `out_plan` and `out_cpe` valid pointers.
enum PnlStatus pnl_results_series_info(const struct PnlResults *results,
                                       size_t index,
                                       struct PnlPlan *out_plan,
                                       bool *out_cpe);

// Copy one metric of series `index` into `out_values` (one value per SNR point).
//
// # Safety
// `results` must be a live handle; `out_values` must hold `len` values.
enum PnlStatus pnl_results_metric(const struct PnlResults *results,
                                  size_t index,
                                  enum PnlMetric metric,
                                  double *out_values,
                                  size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PNLINK_H */
