#ifndef TVEF_H
#define TVEF_H

/*
 * C interface to the time-varying market efficiency toolkit. All entry
 * points return a status code; rich results live behind opaque handles with
 * explicit free functions. Handles are not thread-safe; the error message
 * store is per thread.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TVEF_API __declspec(dllexport)
#else
#define TVEF_API __attribute__((visibility("default")))
#endif

/* Status codes; nonzero values double as process exit codes. */
#define TVEF_OK 0
#define TVEF_ERR_CONFIG 2
#define TVEF_ERR_DATA 3
#define TVEF_ERR_NUMERIC 4

TVEF_API const char* tvef_version(void);

/* Message of the most recent failure on the calling thread ("" if none). */
TVEF_API const char* tvef_last_error(void);

/* ---- return series ------------------------------------------------------ */

/* Holds a monthly log-return series derived from a price file. */
typedef struct tvef_series tvef_series;

/* Loads prices, restricts to [start, end] (empty strings keep the ends,
 * months read "YYYY-MM" or "YYYY.MM"), and stores the log returns. */
TVEF_API int tvef_series_load(const char* path, const char* date_column,
                              const char* price_column, const char* start, const char* end,
                              tvef_series** out);

/* Wraps raw return values; months are synthesized from 1900-01. */
TVEF_API int tvef_series_from_values(const double* values, size_t n, tvef_series** out);

TVEF_API size_t tvef_series_length(const tvef_series* s);
TVEF_API int tvef_series_values(const tvef_series* s, double* buffer, size_t n);
TVEF_API int tvef_series_stats(const tvef_series* s, double* mean, double* sd, double* min,
                               double* max, size_t* n);
TVEF_API void tvef_series_free(tvef_series* s);

/* ---- unit root and constant-coefficient AR ------------------------------ */

/* GLS-detrended ADF test; trend nonzero includes a linear trend, max_lag
 * zero selects the Schwert bound, lag choice is by the modified BIC. */
TVEF_API int tvef_adf_gls(const tvef_series* s, int max_lag, int trend, double* statistic,
                          int* lag, double* phi_hat);

/* AR order by the Schwarz criterion over 1..max_q. */
TVEF_API int tvef_select_order(const tvef_series* s, int max_q, int* order);

/* Least-squares AR(q); coefficients and standard_errors hold q+1 entries,
 * intercept first. Standard errors are Newey-West; bandwidth -1 selects the
 * plug-in rule. Any output pointer may be NULL. */
TVEF_API int tvef_fit_ar(const tvef_series* s, int q, int hac_bandwidth, double* coefficients,
                         double* standard_errors, double* adj_r2);

/* Hansen's joint parameter-constancy statistic for the AR(q). */
TVEF_API int tvef_hansen_lc(const tvef_series* s, int q, double* statistic,
                            double* critical_1pct);

TVEF_API int tvef_ljung_box(const double* x, size_t n, int lags, double* statistic,
                            double* p_value);

/* ---- time-varying AR ----------------------------------------------------- */

typedef struct tvef_tvar_fit tvef_tvar_fit;

/* Solves the random-walk-coefficient AR(q) in one stacked weighted
 * least-squares pass. The coefficient prior is the whole-sample AR(q) fit.
 * hac_bandwidth: -2 keeps the least-squares covariance, -1 applies the
 * Newey-West correction with the plug-in bandwidth, >= 0 fixes it. */
TVEF_API int tvef_tvar_solve(const tvef_series* s, int q, double lambda, double prior_weight,
                             int hac_bandwidth, tvef_tvar_fit** out);

/* Profile prediction-error likelihood over the grid (NULL uses the default
 * 25-point log grid on [1e-6, 1]). */
TVEF_API int tvef_tvar_select_lambda(const tvef_series* s, int q, const double* grid,
                                     size_t grid_len, double prior_weight, double* selected);

TVEF_API int tvef_tvar_dimensions(const tvef_tvar_fit* f, int* q, int* T);
TVEF_API int tvef_tvar_intercept(const tvef_tvar_fit* f, double* intercept, double* se);

/* Coefficient path ell (1-based) and its standard errors; buffers hold T.
 * Either buffer may be NULL. */
TVEF_API int tvef_tvar_path(const tvef_tvar_fit* f, int ell, double* values, double* ses,
                            size_t n);

/* Effective window width (months) of the smoother weights for coefficient
 * ell at period tau (both 1-based). */
TVEF_API int tvef_tvar_window_width(const tvef_tvar_fit* f, int ell, size_t tau, size_t* width);

TVEF_API void tvef_tvar_fit_free(tvef_tvar_fit* f);

/* ---- efficiency multipliers ---------------------------------------------- */

typedef struct tvef_multipliers tvef_multipliers;

TVEF_API int tvef_multipliers_compute(const tvef_tvar_fit* f, int horizon, double ci_level,
                                      tvef_multipliers** out);

/* Long-run multiplier path; buffers hold T. Non-stationary periods carry NaN
 * and a zero flag. Any buffer may be NULL. */
TVEF_API int tvef_multipliers_longrun(const tvef_multipliers* m, double* values, double* ses,
                                      int* stationary, size_t n);

/* Interim multipliers at 1-based period t; beta holds horizon+1 entries. */
TVEF_API int tvef_multipliers_interim(const tvef_multipliers* m, int t, double* beta, size_t n);

TVEF_API void tvef_multipliers_free(tvef_multipliers* m);

/* Residual bootstrap of the flat-path null; see the manifest for the
 * conventions. Statistic and p_value may be NULL. */
TVEF_API int tvef_bootstrap_joint(const tvef_tvar_fit* f, const tvef_series* s,
                                  int replications, uint64_t seed, int workers,
                                  double* statistic, double* p_value);

/* Closed-form helpers on a fixed coefficient vector. */
TVEF_API int tvef_longrun_multiplier(const double* alpha, size_t q, double* phi);
TVEF_API int tvef_interim_multipliers(const double* alpha, size_t q, int horizon, double* beta);

/* ---- filtering and spectra ------------------------------------------------ */

typedef struct tvef_spectrum tvef_spectrum;

TVEF_API int tvef_hp_filter(const double* x, size_t n, double lambda, double* trend,
                            double* cycle);

/* Raw (n_spans = 0) or modified-Daniell smoothed periodogram. */
TVEF_API int tvef_periodogram(const double* x, size_t n, int demean, const int* spans,
                              size_t n_spans, tvef_spectrum** out);

TVEF_API int tvef_ar_spectrum(const double* x, size_t n, int max_order, tvef_spectrum** out);

TVEF_API size_t tvef_spectrum_length(const tvef_spectrum* sp);
TVEF_API int tvef_spectrum_values(const tvef_spectrum* sp, double* frequency, double* density,
                                  size_t n);
TVEF_API int tvef_spectrum_dominant_period(const tvef_spectrum* sp, double min_period,
                                           double* period_months);
TVEF_API void tvef_spectrum_free(tvef_spectrum* sp);

/* ---- pipeline ------------------------------------------------------------- */

/* Runs the full pipeline described by a JSON config; *manifest_json receives
 * the run manifest (free with tvef_string_free). */
TVEF_API int tvef_pipeline_run(const char* config_json, char** manifest_json);

/* Runs one named stage against the artifacts in the configured output
 * directory. */
TVEF_API int tvef_pipeline_stage(const char* stage, const char* config_json,
                                 char** result_json);

/* Renders a columnar artifact (kinds: line_with_band, surface_long_format,
 * spectrum_panel) to an SVG file. */
TVEF_API int tvef_emit_plot(const char* artifact_path, const char* kind, const char* out_path);

/* Internal consistency suite; *report receives one line per check. Returns
 * TVEF_OK when every check passes, TVEF_ERR_NUMERIC otherwise. */
TVEF_API int tvef_selfcheck(char** report);

TVEF_API void tvef_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* TVEF_H */
