#include "core/unitroot.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "core/mathutil.hpp"

namespace tvef {

namespace {

double noise_cbar(Deterministic det) {
  return det == Deterministic::Constant ? -7.0 : -13.5;
}

Eigen::MatrixXd deterministic_terms(std::size_t n, Deterministic det) {
  int k = det == Deterministic::Constant ? 1 : 2;
  Eigen::MatrixXd z(n, k);
  for (std::size_t t = 0; t < n; ++t) {
    z(t, 0) = 1.0;
    if (k == 2) z(t, 1) = static_cast<double>(t + 1);
  }
  return z;
}

}  // namespace

GlsDetrendResult gls_detrend(std::span<const double> y, Deterministic det) {
  std::size_t n = y.size();
  if (n < 8) throw DataError("series too short for GLS detrending");
  double abar = 1.0 + noise_cbar(det) / static_cast<double>(n);
  Eigen::MatrixXd z = deterministic_terms(n, det);

  Eigen::VectorXd yq(n);
  Eigen::MatrixXd zq(n, z.cols());
  yq(0) = y[0];
  zq.row(0) = z.row(0);
  for (std::size_t t = 1; t < n; ++t) {
    yq(t) = y[t] - abar * y[t - 1];
    zq.row(t) = z.row(t) - abar * z.row(t - 1);
  }

  OlsFit fit = ols(zq, yq);
  GlsDetrendResult out;
  out.delta = fit.coef;
  out.detrended.resize(n);
  for (std::size_t t = 0; t < n; ++t) out.detrended[t] = y[t] - z.row(t).dot(fit.coef);

  double num = 0.0, den = 0.0;
  for (std::size_t t = 1; t < n; ++t) {
    num += out.detrended[t] * out.detrended[t - 1];
    den += out.detrended[t - 1] * out.detrended[t - 1];
  }
  if (den <= 0.0) throw NumericError("degenerate detrended series");
  out.phi_hat = num / den;
  return out;
}

double adf_gls_critical_value(Deterministic det, double level) {
  struct Row {
    double level, constant, trend;
  };
  // Standard tabulated values for the demeaned (Dickey-Fuller no-constant
  // distribution) and detrended cases.
  static const Row rows[] = {
      {0.01, -2.58, -3.42},
      {0.05, -1.95, -2.89},
      {0.10, -1.62, -2.57},
  };
  for (const Row& r : rows) {
    if (std::fabs(level - r.level) < 1e-12) {
      return det == Deterministic::Constant ? r.constant : r.trend;
    }
  }
  throw ConfigError("no tabulated critical value for level " + std::to_string(level));
}

AdfGlsResult adf_gls_test(std::span<const double> y, int max_lag, LagCriterion crit,
                          Deterministic det) {
  std::size_t n = y.size();
  if (n < 20) throw DataError("series too short for the unit-root test");
  GlsDetrendResult dt = gls_detrend(y, det);
  const std::vector<double>& w = dt.detrended;

  int kmax = max_lag;
  if (kmax <= 0) {
    kmax = static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
  }
  if (static_cast<std::size_t>(kmax) + 16 > n) {
    throw DataError("maximum lag leaves too few observations");
  }

  std::vector<double> dw(n, 0.0);
  for (std::size_t t = 1; t < n; ++t) dw[t] = w[t] - w[t - 1];

  // Regression rows for lag k on sample t = first..n-1 (0-based):
  // dw[t] on w[t-1], dw[t-1..t-k].
  auto build = [&](int k, std::size_t first, Eigen::MatrixXd& X, Eigen::VectorXd& yv) {
    std::size_t rows = n - first;
    X.resize(rows, k + 1);
    yv.resize(rows);
    for (std::size_t t = first; t < n; ++t) {
      std::size_t i = t - first;
      yv(i) = dw[t];
      X(i, 0) = w[t - 1];
      for (int j = 1; j <= k; ++j) X(i, j) = dw[t - j];
    }
  };

  // Common estimation sample leaves room for the largest lag.
  std::size_t first_common = static_cast<std::size_t>(kmax) + 1;
  double n_eff = static_cast<double>(n - first_common);
  double ct = crit == LagCriterion::MBIC ? std::log(n_eff) : 2.0;

  double sum_w2 = 0.0;
  for (std::size_t t = first_common; t < n; ++t) sum_w2 += w[t - 1] * w[t - 1];

  int best_k = 0;
  double best_mic = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    Eigen::MatrixXd X;
    Eigen::VectorXd yv;
    build(k, first_common, X, yv);
    OlsFit fit = ols(X, yv);
    double sigma2 = fit.rss / n_eff;
    if (sigma2 <= 0.0) throw NumericError("zero residual variance in lag selection");
    double tau = fit.coef(0) * fit.coef(0) * sum_w2 / sigma2;
    double mic = std::log(sigma2) + ct * (tau + static_cast<double>(k)) / n_eff;
    if (k == 0 || mic < best_mic) {
      best_mic = mic;
      best_k = k;
    }
  }

  // Final statistic on the longest sample the chosen lag allows.
  std::size_t first = static_cast<std::size_t>(best_k) + 1;
  Eigen::MatrixXd X;
  Eigen::VectorXd yv;
  build(best_k, first, X, yv);
  OlsFit fit = ols(X, yv);
  double dof = static_cast<double>(X.rows()) - static_cast<double>(best_k + 1);
  double sigma2 = fit.rss / dof;
  double se = std::sqrt(sigma2 * fit.xtx_inverse(0, 0));
  if (se <= 0.0) throw NumericError("zero standard error in the unit-root regression");

  AdfGlsResult out;
  out.statistic = fit.coef(0) / se;
  out.lag = best_k;
  out.phi_hat = 1.0 + fit.coef(0);
  out.deterministic = det;
  out.critical_1pct = adf_gls_critical_value(det, 0.01);
  return out;
}

}  // namespace tvef
