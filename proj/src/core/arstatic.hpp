#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "core/series.hpp"

namespace tvef {

struct ArFit {
  int order = 0;
  Eigen::VectorXd coefficients;   // intercept first, then lag coefficients
  Eigen::MatrixXd covariance;     // heteroskedasticity/autocorrelation robust
  std::vector<double> residuals;
  double adj_r2 = 0.0;
  double sigma2 = 0.0;            // rss / (n_used - order - 1)
  std::size_t n_used = 0;
  int hac_bandwidth = 0;
};

// floor(4 (n/100)^{2/9}), the common plug-in truncation lag.
int newey_west_bandwidth(std::size_t n);

// Least-squares AR(q) with intercept, conditioning on the first q values
// unless the presample already covers them. Standard errors use the
// Newey-West estimator with Bartlett weights w_j = 1 - j/(L+1) and no
// degrees-of-freedom adjustment; bandwidth < 0 selects the plug-in rule,
// bandwidth 0 reduces to White's estimator.
ArFit fit_ar(const ReturnSeries& r, int q, int hac_bandwidth = -1);

// Schwarz criterion ln(rss/m) + (q+1) ln(m)/m evaluated on the common sample
// that conditions on max_q initial values; q runs over 1..max_q and ties go
// to the smaller order.
int select_order_sbic(const ReturnSeries& r, int max_q);

struct HansenLcResult {
  double statistic = 0.0;
  int n_parameters = 0;   // q + 2: intercept, lags, error variance
  double critical_1pct = 0.0;
};

// Hansen's Lc test of joint parameter constancy over the regression
// coefficients and the error variance, from cumulative score sums.
HansenLcResult hansen_lc(const ArFit& fit, const ReturnSeries& r);

// Asymptotic 1% critical value for Lc with p parameters (p <= 8).
double hansen_lc_critical_1pct(int p);

struct LjungBoxResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Portmanteau test with the small-sample n(n+2)/(n-k) scaling; a constant
// series yields statistic 0 and p-value 1.
LjungBoxResult ljung_box(std::span<const double> x, int lags);

}  // namespace tvef
