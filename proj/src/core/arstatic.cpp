#include "core/arstatic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "core/mathutil.hpp"

namespace tvef {

namespace {

// Design rows for an AR(q): one row per usable observation. When the
// presample covers q lags every value is usable, otherwise the first q
// values only feed the lag columns.
void ar_design(const ReturnSeries& r, int q, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
  std::size_t n = r.size();
  std::size_t first = r.presample.size() >= static_cast<std::size_t>(q)
                          ? 0
                          : static_cast<std::size_t>(q);
  if (n <= first) throw DataError("series too short for an AR(" + std::to_string(q) + ")");
  std::size_t rows = n - first;
  X.resize(rows, q + 1);
  y.resize(rows);
  for (std::size_t t = first; t < n; ++t) {
    std::size_t i = t - first;
    y(i) = r.values[t];
    X(i, 0) = 1.0;
    for (int j = 1; j <= q; ++j) X(i, j) = r.lag(static_cast<std::ptrdiff_t>(t), j);
  }
}

}  // namespace

int newey_west_bandwidth(std::size_t n) {
  return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

ArFit fit_ar(const ReturnSeries& r, int q, int hac_bandwidth) {
  if (q < 1) throw ConfigError("AR order must be at least 1");
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  ar_design(r, q, X, y);
  std::size_t n = static_cast<std::size_t>(X.rows());
  if (n < static_cast<std::size_t>(q) + 2) throw DataError("too few observations for the AR fit");

  OlsFit fit = ols(X, y);

  ArFit out;
  out.order = q;
  out.coefficients = fit.coef;
  out.residuals.assign(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
  out.n_used = n;

  double ybar = y.mean();
  double tss = (y.array() - ybar).square().sum();
  if (tss <= 0.0) throw NumericError("zero total variation in the AR response");
  double r2 = 1.0 - fit.rss / tss;
  out.adj_r2 = 1.0 - (1.0 - r2) * (static_cast<double>(n) - 1.0) /
                         (static_cast<double>(n) - static_cast<double>(q) - 1.0);
  out.sigma2 = fit.rss / (static_cast<double>(n) - static_cast<double>(q) - 1.0);

  int L = hac_bandwidth < 0 ? newey_west_bandwidth(n) : hac_bandwidth;
  out.hac_bandwidth = L;

  // Scores g_t = x_t e_t; S = Gamma_0 + sum_j w_j (Gamma_j + Gamma_j').
  Eigen::MatrixXd G(n, q + 1);
  for (std::size_t t = 0; t < n; ++t) G.row(t) = X.row(t) * fit.residuals(t);
  Eigen::MatrixXd S = G.transpose() * G;
  for (int j = 1; j <= L; ++j) {
    double wj = 1.0 - static_cast<double>(j) / (static_cast<double>(L) + 1.0);
    Eigen::MatrixXd gj = Eigen::MatrixXd::Zero(q + 1, q + 1);
    for (std::size_t t = static_cast<std::size_t>(j); t < n; ++t) {
      gj += G.row(t).transpose() * G.row(t - j);
    }
    S += wj * (gj + gj.transpose());
  }
  out.covariance = fit.xtx_inverse * S * fit.xtx_inverse;
  return out;
}

int select_order_sbic(const ReturnSeries& r, int max_q) {
  if (max_q < 1) throw ConfigError("max_q must be at least 1");
  std::size_t n = r.size();
  std::size_t held = r.presample.size() >= static_cast<std::size_t>(max_q)
                         ? 0
                         : static_cast<std::size_t>(max_q);
  if (n <= held + static_cast<std::size_t>(max_q) + 2) {
    throw DataError("series too short for order selection up to " + std::to_string(max_q));
  }
  std::size_t rows = n - held;
  double m = static_cast<double>(rows);

  int best_q = 1;
  double best = 0.0;
  for (int q = 1; q <= max_q; ++q) {
    Eigen::MatrixXd X(rows, q + 1);
    Eigen::VectorXd y(rows);
    for (std::size_t t = held; t < n; ++t) {
      std::size_t i = t - held;
      y(i) = r.values[t];
      X(i, 0) = 1.0;
      for (int j = 1; j <= q; ++j) X(i, j) = r.lag(static_cast<std::ptrdiff_t>(t), j);
    }
    OlsFit fit = ols(X, y);
    if (fit.rss <= 0.0) throw NumericError("zero residual sum of squares in order selection");
    double sbic = std::log(fit.rss / m) + (static_cast<double>(q) + 1.0) * std::log(m) / m;
    if (q == 1 || sbic < best) {
      best = sbic;
      best_q = q;
    }
  }
  return best_q;
}

double hansen_lc_critical_1pct(int p) {
  // Asymptotic 1% points of the Lc distribution indexed by parameter count.
  static const double table[] = {0.748, 1.07, 1.35, 1.60, 1.88, 2.12, 2.35, 2.59};
  if (p < 1 || p > 8) throw ConfigError("no tabulated Lc critical value for p = " + std::to_string(p));
  return table[p - 1];
}

HansenLcResult hansen_lc(const ArFit& fit, const ReturnSeries& r) {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  ar_design(r, fit.order, X, y);
  std::size_t n = static_cast<std::size_t>(X.rows());
  if (n != fit.n_used) throw DataError("fit and series disagree on the estimation sample");

  Eigen::VectorXd e = y - X * fit.coefficients;
  double sigma2 = e.squaredNorm() / static_cast<double>(n);

  int p = fit.order + 2;
  Eigen::MatrixXd f(n, p);
  for (std::size_t t = 0; t < n; ++t) {
    f.block(t, 0, 1, fit.order + 1) = X.row(t) * e(t);
    f(t, p - 1) = e(t) * e(t) - sigma2;
  }

  Eigen::MatrixXd v = f.transpose() * f;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(v);
  if (ldlt.info() != Eigen::Success) throw NumericError("singular score outer product in Lc");

  Eigen::VectorXd s = Eigen::VectorXd::Zero(p);
  double lc = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    s += f.row(t).transpose();
    lc += s.dot(ldlt.solve(s));
  }
  lc /= static_cast<double>(n);

  HansenLcResult out;
  out.statistic = lc;
  out.n_parameters = p;
  out.critical_1pct = hansen_lc_critical_1pct(p);
  return out;
}

LjungBoxResult ljung_box(std::span<const double> x, int lags) {
  std::size_t n = x.size();
  if (lags < 1) throw ConfigError("Ljung-Box needs at least one lag");
  if (n <= static_cast<std::size_t>(lags) + 1) throw DataError("series too short for the requested lags");
  double xbar = mean(x);
  double den = 0.0;
  for (double v : x) den += (v - xbar) * (v - xbar);
  LjungBoxResult out;
  // A constant series has no autocorrelation to test; the range check avoids
  // treating rounding residue in den as signal.
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (den <= 0.0 || *lo == *hi) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }
  double q = 0.0;
  double nd = static_cast<double>(n);
  for (int k = 1; k <= lags; ++k) {
    double num = 0.0;
    for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) {
      num += (x[t] - xbar) * (x[t - k] - xbar);
    }
    double rho = num / den;
    q += rho * rho / (nd - static_cast<double>(k));
  }
  q *= nd * (nd + 2.0);
  out.statistic = q;
  out.p_value = 1.0 - chi2_cdf(q, static_cast<double>(lags));
  return out;
}

}  // namespace tvef
