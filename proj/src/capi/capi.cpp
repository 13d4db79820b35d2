#include "tvef/tvef.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core/arstatic.hpp"
#include "core/efficiency.hpp"
#include "core/errors.hpp"
#include "core/kalman.hpp"
#include "core/pipeline.hpp"
#include "core/series.hpp"
#include "core/spectral.hpp"
#include "core/tvar.hpp"
#include "core/unitroot.hpp"
#include "core/version.hpp"

// Handle definitions. Each wraps the core value types by copy or move so the
// C side owns an independent object with no reference into caller memory.
struct tvef_series {
  tvef::ReturnSeries returns;
};

struct tvef_tvar_fit {
  tvef::StackedSystem system;
  tvef::TvarFit fit;
};

struct tvef_multipliers {
  tvef::MultiplierPath path;
};

struct tvef_spectrum {
  tvef::SpectrumEstimate estimate;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Runs the body and maps exceptions onto status codes. Library errors carry
// their own code; std::invalid_argument marks malformed caller input.
template <typename F>
int guarded(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const tvef::Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::invalid_argument& e) {
    return fail(TVEF_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(TVEF_ERR_NUMERIC, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::optional<tvef::Month> month_opt(const char* text) {
  if (text == nullptr || *text == '\0') return std::nullopt;
  return tvef::Month::parse(text);
}

// Whole-sample least-squares lag coefficients, the shared prior convention
// for the time-varying solve.
Eigen::VectorXd ols_prior(const tvef::ReturnSeries& r, int q) {
  tvef::ArFit base = tvef::fit_ar(r, q, 0);
  return base.coefficients.segment(1, q);
}

}  // namespace

extern "C" {

const char* tvef_version(void) { return TVEF_VERSION_STRING; }

const char* tvef_last_error(void) { return g_last_error.c_str(); }

/* ---- return series ------------------------------------------------------ */

int tvef_series_load(const char* path, const char* date_column, const char* price_column,
                     const char* start, const char* end, tvef_series** out) {
  if (path == nullptr || out == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_series_load requires path and out");
  return guarded([&] {
    tvef::PriceSeries prices = tvef::load_prices_file(
        path, date_column != nullptr && *date_column ? date_column : "Date",
        price_column != nullptr && *price_column ? price_column : "Price");
    prices = tvef::slice(prices, month_opt(start), month_opt(end));
    *out = new tvef_series{tvef::log_returns(prices)};
    return TVEF_OK;
  });
}

int tvef_series_from_values(const double* values, size_t n, tvef_series** out) {
  if (out == nullptr || (values == nullptr && n > 0))
    return fail(TVEF_ERR_CONFIG, "tvef_series_from_values requires values and out");
  return guarded([&] {
    tvef::ReturnSeries r;
    r.values.assign(values, values + n);
    r.dates.reserve(n);
    tvef::Month m{1900, 1};
    for (size_t i = 0; i < n; ++i) {
      r.dates.push_back(m);
      m = m.next();
    }
    *out = new tvef_series{std::move(r)};
    return TVEF_OK;
  });
}

size_t tvef_series_length(const tvef_series* s) { return s == nullptr ? 0 : s->returns.size(); }

int tvef_series_values(const tvef_series* s, double* buffer, size_t n) {
  if (s == nullptr || buffer == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_series_values requires a series and a buffer");
  if (n < s->returns.size())
    return fail(TVEF_ERR_CONFIG, "tvef_series_values buffer is smaller than the series");
  std::copy(s->returns.values.begin(), s->returns.values.end(), buffer);
  return TVEF_OK;
}

int tvef_series_stats(const tvef_series* s, double* mean, double* sd, double* min, double* max,
                      size_t* n) {
  if (s == nullptr) return fail(TVEF_ERR_CONFIG, "tvef_series_stats requires a series");
  return guarded([&] {
    tvef::DescriptiveStats d = tvef::describe(s->returns);
    if (mean != nullptr) *mean = d.mean;
    if (sd != nullptr) *sd = d.sd;
    if (min != nullptr) *min = d.min;
    if (max != nullptr) *max = d.max;
    if (n != nullptr) *n = d.n;
    return TVEF_OK;
  });
}

void tvef_series_free(tvef_series* s) { delete s; }

/* ---- unit root and constant-coefficient AR ------------------------------ */

int tvef_adf_gls(const tvef_series* s, int max_lag, int trend, double* statistic, int* lag,
                 double* phi_hat) {
  if (s == nullptr) return fail(TVEF_ERR_CONFIG, "tvef_adf_gls requires a series");
  return guarded([&] {
    tvef::AdfGlsResult res = tvef::adf_gls_test(
        s->returns.values, max_lag, tvef::LagCriterion::MBIC,
        trend ? tvef::Deterministic::ConstantAndTrend : tvef::Deterministic::Constant);
    if (statistic != nullptr) *statistic = res.statistic;
    if (lag != nullptr) *lag = res.lag;
    if (phi_hat != nullptr) *phi_hat = res.phi_hat;
    return TVEF_OK;
  });
}

int tvef_select_order(const tvef_series* s, int max_q, int* order) {
  if (s == nullptr || order == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_select_order requires a series and an order slot");
  return guarded([&] {
    *order = tvef::select_order_sbic(s->returns, max_q);
    return TVEF_OK;
  });
}

int tvef_fit_ar(const tvef_series* s, int q, int hac_bandwidth, double* coefficients,
                double* standard_errors, double* adj_r2) {
  if (s == nullptr) return fail(TVEF_ERR_CONFIG, "tvef_fit_ar requires a series");
  return guarded([&] {
    tvef::ArFit fit = tvef::fit_ar(s->returns, q, hac_bandwidth);
    if (coefficients != nullptr)
      std::copy(fit.coefficients.data(), fit.coefficients.data() + q + 1, coefficients);
    if (standard_errors != nullptr)
      for (int j = 0; j <= q; ++j) standard_errors[j] = std::sqrt(fit.covariance(j, j));
    if (adj_r2 != nullptr) *adj_r2 = fit.adj_r2;
    return TVEF_OK;
  });
}

int tvef_hansen_lc(const tvef_series* s, int q, double* statistic, double* critical_1pct) {
  if (s == nullptr) return fail(TVEF_ERR_CONFIG, "tvef_hansen_lc requires a series");
  return guarded([&] {
    tvef::ArFit fit = tvef::fit_ar(s->returns, q);
    tvef::HansenLcResult res = tvef::hansen_lc(fit, s->returns);
    if (statistic != nullptr) *statistic = res.statistic;
    if (critical_1pct != nullptr) *critical_1pct = res.critical_1pct;
    return TVEF_OK;
  });
}

int tvef_ljung_box(const double* x, size_t n, int lags, double* statistic, double* p_value) {
  if (x == nullptr) return fail(TVEF_ERR_CONFIG, "tvef_ljung_box requires data");
  return guarded([&] {
    tvef::LjungBoxResult res = tvef::ljung_box(std::span<const double>(x, n), lags);
    if (statistic != nullptr) *statistic = res.statistic;
    if (p_value != nullptr) *p_value = res.p_value;
    return TVEF_OK;
  });
}

/* ---- time-varying AR ----------------------------------------------------- */

int tvef_tvar_solve(const tvef_series* s, int q, double lambda, double prior_weight,
                    int hac_bandwidth, tvef_tvar_fit** out) {
  if (s == nullptr || out == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_tvar_solve requires a series and an out slot");
  if (!(lambda > 0.0)) return fail(TVEF_ERR_CONFIG, "lambda must be positive");
  if (!(prior_weight > 0.0)) return fail(TVEF_ERR_CONFIG, "prior_weight must be positive");
  return guarded([&] {
    Eigen::VectorXd prior = ols_prior(s->returns, q);
    tvef::StackedSystem sys = tvef::build_stacked(s->returns, q, prior, lambda, prior_weight);
    tvef::TvarFit fit = tvef::solve_stacked(sys);
    if (hac_bandwidth >= -1) tvef::apply_hac_covariance(fit, sys, hac_bandwidth);
    *out = new tvef_tvar_fit{std::move(sys), std::move(fit)};
    return TVEF_OK;
  });
}

int tvef_tvar_select_lambda(const tvef_series* s, int q, const double* grid, size_t grid_len,
                            double prior_weight, double* selected) {
  if (s == nullptr || selected == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_tvar_select_lambda requires a series and a result slot");
  if (grid == nullptr && grid_len > 0)
    return fail(TVEF_ERR_CONFIG, "grid pointer is null but grid_len is nonzero");
  return guarded([&] {
    std::vector<double> g =
        grid_len > 0 ? std::vector<double>(grid, grid + grid_len) : tvef::default_lambda_grid();
    Eigen::VectorXd prior = ols_prior(s->returns, q);
    *selected = tvef::select_lambda(s->returns, q, g, prior, prior_weight);
    return TVEF_OK;
  });
}

int tvef_tvar_dimensions(const tvef_tvar_fit* f, int* q, int* T) {
  if (f == nullptr) return fail(TVEF_ERR_CONFIG, "tvef_tvar_dimensions requires a fit");
  if (q != nullptr) *q = f->fit.q;
  if (T != nullptr) *T = f->fit.T;
  return TVEF_OK;
}

int tvef_tvar_intercept(const tvef_tvar_fit* f, double* intercept, double* se) {
  if (f == nullptr) return fail(TVEF_ERR_CONFIG, "tvef_tvar_intercept requires a fit");
  if (intercept != nullptr) *intercept = f->fit.intercept;
  if (se != nullptr) *se = f->fit.intercept_se;
  return TVEF_OK;
}

int tvef_tvar_path(const tvef_tvar_fit* f, int ell, double* values, double* ses, size_t n) {
  if (f == nullptr) return fail(TVEF_ERR_CONFIG, "tvef_tvar_path requires a fit");
  if (ell < 1 || ell > f->fit.q)
    return fail(TVEF_ERR_CONFIG, "coefficient index is outside 1..q");
  if (n < static_cast<size_t>(f->fit.T))
    return fail(TVEF_ERR_CONFIG, "tvef_tvar_path buffer is smaller than the path");
  return guarded([&] {
    for (int t = 0; t < f->fit.T; ++t) {
      if (values != nullptr) values[t] = f->fit.paths(ell - 1, t);
      if (ses != nullptr)
        ses[t] = std::sqrt(std::max(0.0, f->fit.covariances[t](ell - 1, ell - 1)));
    }
    return TVEF_OK;
  });
}

int tvef_tvar_window_width(const tvef_tvar_fit* f, int ell, size_t tau, size_t* width) {
  if (f == nullptr || width == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_tvar_window_width requires a fit and a result slot");
  return guarded([&] {
    tvef::SmootherWeights w = tvef::smoother_weights(f->system, f->fit, ell, tau);
    *width = w.width;
    return TVEF_OK;
  });
}

void tvef_tvar_fit_free(tvef_tvar_fit* f) { delete f; }

/* ---- efficiency multipliers ---------------------------------------------- */

int tvef_multipliers_compute(const tvef_tvar_fit* f, int horizon, double ci_level,
                             tvef_multipliers** out) {
  if (f == nullptr || out == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_multipliers_compute requires a fit and an out slot");
  return guarded([&] {
    *out = new tvef_multipliers{tvef::multiplier_path(f->fit, horizon, ci_level)};
    return TVEF_OK;
  });
}

int tvef_multipliers_longrun(const tvef_multipliers* m, double* values, double* ses,
                             int* stationary, size_t n) {
  if (m == nullptr) return fail(TVEF_ERR_CONFIG, "tvef_multipliers_longrun requires a handle");
  const size_t T = static_cast<size_t>(m->path.longrun.size());
  if (n < T) return fail(TVEF_ERR_CONFIG, "tvef_multipliers_longrun buffer is too small");
  for (size_t t = 0; t < T; ++t) {
    if (values != nullptr) values[t] = m->path.longrun(static_cast<Eigen::Index>(t));
    if (ses != nullptr) ses[t] = m->path.longrun_se(static_cast<Eigen::Index>(t));
    if (stationary != nullptr) stationary[t] = m->path.stationary[t] ? 1 : 0;
  }
  return TVEF_OK;
}

int tvef_multipliers_interim(const tvef_multipliers* m, int t, double* beta, size_t n) {
  if (m == nullptr || beta == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_multipliers_interim requires a handle and a buffer");
  if (t < 1 || t > m->path.interim.rows())
    return fail(TVEF_ERR_CONFIG, "period index is outside 1..T");
  const size_t h = static_cast<size_t>(m->path.interim.cols());
  if (n < h) return fail(TVEF_ERR_CONFIG, "tvef_multipliers_interim buffer is too small");
  for (size_t k = 0; k < h; ++k)
    beta[k] = m->path.interim(t - 1, static_cast<Eigen::Index>(k));
  return TVEF_OK;
}

void tvef_multipliers_free(tvef_multipliers* m) { delete m; }

int tvef_bootstrap_joint(const tvef_tvar_fit* f, const tvef_series* s, int replications,
                         uint64_t seed, int workers, double* statistic, double* p_value) {
  if (f == nullptr || s == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_bootstrap_joint requires a fit and a series");
  return guarded([&] {
    tvef::BootstrapJointTest res =
        tvef::bootstrap_joint_test(f->fit, s->returns, replications, seed, workers);
    if (statistic != nullptr) *statistic = res.statistic;
    if (p_value != nullptr) *p_value = res.p_value;
    return TVEF_OK;
  });
}

int tvef_longrun_multiplier(const double* alpha, size_t q, double* phi) {
  if (phi == nullptr || (alpha == nullptr && q > 0))
    return fail(TVEF_ERR_CONFIG, "tvef_longrun_multiplier requires alpha and a result slot");
  return guarded([&] {
    Eigen::VectorXd a = q > 0 ? Eigen::Map<const Eigen::VectorXd>(alpha, q).eval()
                              : Eigen::VectorXd(0);
    *phi = tvef::longrun_multiplier(a);
    return TVEF_OK;
  });
}

int tvef_interim_multipliers(const double* alpha, size_t q, int horizon, double* beta) {
  if (beta == nullptr || (alpha == nullptr && q > 0))
    return fail(TVEF_ERR_CONFIG, "tvef_interim_multipliers requires alpha and a buffer");
  return guarded([&] {
    Eigen::VectorXd a = q > 0 ? Eigen::Map<const Eigen::VectorXd>(alpha, q).eval()
                              : Eigen::VectorXd(0);
    Eigen::VectorXd b = tvef::interim_multipliers(a, horizon);
    std::copy(b.data(), b.data() + b.size(), beta);
    return TVEF_OK;
  });
}

/* ---- filtering and spectra ------------------------------------------------ */

int tvef_hp_filter(const double* x, size_t n, double lambda, double* trend, double* cycle) {
  if (x == nullptr) return fail(TVEF_ERR_CONFIG, "tvef_hp_filter requires data");
  return guarded([&] {
    tvef::HpDecomposition d = tvef::hp_filter(std::span<const double>(x, n), lambda);
    if (trend != nullptr) std::copy(d.trend.begin(), d.trend.end(), trend);
    if (cycle != nullptr) std::copy(d.cycle.begin(), d.cycle.end(), cycle);
    return TVEF_OK;
  });
}

int tvef_periodogram(const double* x, size_t n, int demean, const int* spans, size_t n_spans,
                     tvef_spectrum** out) {
  if (x == nullptr || out == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_periodogram requires data and an out slot");
  if (spans == nullptr && n_spans > 0)
    return fail(TVEF_ERR_CONFIG, "spans pointer is null but n_spans is nonzero");
  return guarded([&] {
    *out = new tvef_spectrum{tvef::periodogram(std::span<const double>(x, n), demean != 0,
                                               std::span<const int>(spans, n_spans))};
    return TVEF_OK;
  });
}

int tvef_ar_spectrum(const double* x, size_t n, int max_order, tvef_spectrum** out) {
  if (x == nullptr || out == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_ar_spectrum requires data and an out slot");
  return guarded([&] {
    *out = new tvef_spectrum{tvef::ar_spectrum(std::span<const double>(x, n), max_order)};
    return TVEF_OK;
  });
}

size_t tvef_spectrum_length(const tvef_spectrum* sp) {
  return sp == nullptr ? 0 : sp->estimate.frequency.size();
}

int tvef_spectrum_values(const tvef_spectrum* sp, double* frequency, double* density, size_t n) {
  if (sp == nullptr) return fail(TVEF_ERR_CONFIG, "tvef_spectrum_values requires a spectrum");
  if (n < sp->estimate.frequency.size())
    return fail(TVEF_ERR_CONFIG, "tvef_spectrum_values buffer is too small");
  if (frequency != nullptr)
    std::copy(sp->estimate.frequency.begin(), sp->estimate.frequency.end(), frequency);
  if (density != nullptr)
    std::copy(sp->estimate.density.begin(), sp->estimate.density.end(), density);
  return TVEF_OK;
}

int tvef_spectrum_dominant_period(const tvef_spectrum* sp, double min_period,
                                  double* period_months) {
  if (sp == nullptr || period_months == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_spectrum_dominant_period requires a spectrum and a slot");
  return guarded([&] {
    *period_months = min_period > 2.0 ? tvef::dominant_period(sp->estimate, min_period)
                                      : sp->estimate.dominant_period_months;
    return TVEF_OK;
  });
}

void tvef_spectrum_free(tvef_spectrum* sp) { delete sp; }

/* ---- pipeline ------------------------------------------------------------- */

int tvef_pipeline_run(const char* config_json, char** manifest_json) {
  if (config_json == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_pipeline_run requires a config");
  return guarded([&] {
    tvef::PipelineConfig cfg = tvef::config_from_json(config_json);
    std::string manifest = tvef::run_pipeline(cfg);
    if (manifest_json != nullptr) *manifest_json = dup_string(manifest);
    return TVEF_OK;
  });
}

int tvef_pipeline_stage(const char* stage, const char* config_json, char** result_json) {
  if (stage == nullptr || config_json == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_pipeline_stage requires a stage name and a config");
  return guarded([&] {
    tvef::PipelineConfig cfg = tvef::config_from_json(config_json);
    std::string result = tvef::run_stage(stage, cfg);
    if (result_json != nullptr) *result_json = dup_string(result);
    return TVEF_OK;
  });
}

int tvef_emit_plot(const char* artifact_path, const char* kind, const char* out_path) {
  if (artifact_path == nullptr || kind == nullptr || out_path == nullptr)
    return fail(TVEF_ERR_CONFIG, "tvef_emit_plot requires artifact, kind, and output paths");
  return guarded([&] {
    tvef::emit_plot(artifact_path, kind, out_path);
    return TVEF_OK;
  });
}

int tvef_selfcheck(char** report) {
  return guarded([&] {
    std::string text;
    int failures = tvef::selfcheck(text);
    if (report != nullptr) *report = dup_string(text);
    if (failures != 0) {
      g_last_error = std::to_string(failures) + " self-check failure(s)";
      return TVEF_ERR_NUMERIC;
    }
    return TVEF_OK;
  });
}

void tvef_string_free(char* s) { delete[] s; }

}  // extern "C"
