#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace tvef {

enum class Deterministic { Constant, ConstantAndTrend };
enum class LagCriterion { MBIC, MAIC };

struct GlsDetrendResult {
  std::vector<double> detrended;
  double phi_hat = 0.0;       // slope of a no-intercept AR(1) on the detrended series
  Eigen::VectorXd delta;      // fitted deterministic coefficients
};

// Elliott-Rothenberg-Stock local-to-unity GLS detrending. The quasi-difference
// uses alpha_bar = 1 + cbar/n with cbar = -7 (constant) or -13.5 (trend); the
// first observation enters undifferenced.
GlsDetrendResult gls_detrend(std::span<const double> y, Deterministic det);

struct AdfGlsResult {
  double statistic = 0.0;     // t-ratio on the lagged level in the ADF regression
  int lag = 0;                // selected augmentation lag count
  double phi_hat = 0.0;       // 1 + coefficient on the lagged level
  Deterministic deterministic = Deterministic::Constant;
  double critical_1pct = 0.0;
};

// Tabulated critical values for the GLS-demeaned/detrended ADF statistic at
// levels 0.01, 0.05, 0.10.
double adf_gls_critical_value(Deterministic det, double level);

// ADF on the GLS-detrended series with no deterministic terms. Lags chosen by
// the Ng-Perron modified information criterion on a common sample that holds
// back max_lag + 1 observations; the reported statistic is re-estimated on the
// longest sample the chosen lag allows. max_lag <= 0 selects the Schwert rule
// floor(12 (n/100)^{1/4}).
AdfGlsResult adf_gls_test(std::span<const double> y, int max_lag, LagCriterion crit,
                          Deterministic det);

}  // namespace tvef
