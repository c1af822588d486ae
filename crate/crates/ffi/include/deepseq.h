#ifndef DEEPSEQ_H
#define DEEPSEQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DsStatus {
  DS_STATUS_OK = 0,
  DS_STATUS_CONFIG = 1,
  DS_STATUS_DATA = 2,
  DS_STATUS_NUMERICAL = 3,
  /**
   * A required pointer argument was null or a string was not UTF-8.
   */
  DS_STATUS_INVALID_ARGUMENT = 4,
  DS_STATUS_PANIC = 5,
} DsStatus;

/**
 * A model architecture with fitted parameters.
 */
typedef struct DsModel DsModel;

/**
 * A loaded or generated panel.
 */
typedef struct DsPanel DsPanel;

/**
 * Annualized long-short statistics. Undefined values are NaN.
 */
typedef struct DsPerfStats {
  double annualized_return;
  double annualized_std;
  double sharpe;
  double skewness;
  double kurtosis;
  double avg_turnover;
  double max_drawdown;
} DsPerfStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ds_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ds_version(void);

/**
 * Reads a panel CSV.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum DsStatus ds_panel_load(const char *path, struct DsPanel **out);

/**
 * Writes a panel CSV.
 *
 * # Safety
 * `panel` must come from this library; `path` must be NUL-terminated.
 */
enum DsStatus ds_panel_write(const struct DsPanel *panel, const char *path);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `panel` must be null or come from this library.
 */
size_t ds_panel_rows(const struct DsPanel *panel);

/**
 * Number of distinct assets, or 0 for a null handle.
 *
 * # Safety
 * `panel` must be null or come from this library.
 */
size_t ds_panel_assets(const struct DsPanel *panel);

/**
 * # Safety
 * `panel` must be null or come from this library, and not be used again.
 */
void ds_panel_free(struct DsPanel *panel);

/**
 * Generates a synthetic panel starting January 1970 and reports the
 * analytic out-of-sample R² ceiling of its return process.
 *
 * # Safety
 * `out` and `ceiling` must be writable (`ceiling` may be null).
 */
enum DsStatus ds_synth_generate(size_t n_assets,
                                size_t n_months,
                                double momentum_coeff,
                                double reversal_coeff,
                                double noise_std,
                                uint64_t seed,
                                struct DsPanel **out,
                                double *ceiling);

/**
 * Restores a model and its parameters from a checkpoint file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum DsStatus ds_model_load(const char *path, struct DsModel **out);

/**
 * Expected sequence length and per-step feature count.
 *
 * # Safety
 * `model` must come from this library; outputs must be writable.
 */
enum DsStatus ds_model_shape(const struct DsModel *model, size_t *seq_len, size_t *input_dim);

/**
 * Forecasts for `batch` sequences laid out `batch × seq_len × input_dim`,
 * oldest step first. Writes `batch` values to `out`.
 *
 * # Safety
 * `inputs` must hold `batch · seq_len · input_dim` values and `out` room
 * for `batch`.
 */
enum DsStatus ds_model_predict(const struct DsModel *model,
                               const double *inputs,
                               size_t batch,
                               double *out);

/**
 * # Safety
 * `model` must be null or come from this library, and not be used again.
 */
void ds_model_free(struct DsModel *model);

/**
 * Mean squared forecast error (as a fraction).
 *
 * # Safety
 * Both arrays must hold `n` values; `out` must be writable.
 */
enum DsStatus ds_metrics_mse(const double *realized,
                             const double *predicted,
                             size_t n,
                             double *out);

/**
 * Out-of-sample R² against a zero forecast (as a fraction).
 *
 * # Safety
 * Both arrays must hold `n` values; `out` must be writable.
 */
enum DsStatus ds_metrics_r2_oos(const double *realized,
                                const double *predicted,
                                size_t n,
                                double *out);

/**
 * Annualized statistics of monthly long-short returns. `turnovers` may be
 * null when `n_turnovers` is 0.
 *
 * # Safety
 * Arrays must hold the stated number of values; `out` must be writable.
 */
enum DsStatus ds_perf_stats(const double *returns,
                            size_t n_returns,
                            const double *turnovers,
                            size_t n_turnovers,
                            struct DsPerfStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEEPSEQ_H */
