#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "core/arstatic.hpp"
#include "core/errors.hpp"
#include "core/mathutil.hpp"
#include "core/series.hpp"
#include "doctest.h"
#include "testutil.hpp"

using namespace tvef;

namespace {

// Longhand design for an AR(q) conditioning on the first q observations.
void design(const ReturnSeries& r, int q, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
  const std::size_t n = r.size();
  const std::size_t first = static_cast<std::size_t>(q);
  X.resize(n - first, q + 1);
  y.resize(n - first);
  for (std::size_t t = first; t < n; ++t) {
    y(t - first) = r.values[t];
    X(t - first, 0) = 1.0;
    for (int j = 1; j <= q; ++j) X(t - first, j) = r.values[t - static_cast<std::size_t>(j)];
  }
}

Eigen::MatrixXd hac_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& e, int L) {
  const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index t = 0; t < n; ++t)
    S += e(t) * e(t) * X.row(t).transpose() * X.row(t);
  for (int j = 1; j <= L; ++j) {
    const double w = 1.0 - static_cast<double>(j) / (L + 1.0);
    for (Eigen::Index t = j; t < n; ++t) {
      const Eigen::MatrixXd cross =
          e(t) * e(t - j) * X.row(t).transpose() * X.row(t - j);
      S += w * (cross + cross.transpose());
    }
  }
  return bread * S * bread;
}

}  // namespace

TEST_CASE("least squares AR matches a longhand regression") {
  Eigen::VectorXd alpha(2);
  alpha << 0.3, -0.2;
  ReturnSeries r = testutil::simulate_ar(alpha, 0.5, 300, 42);
  ArFit fit = fit_ar(r, 2);

  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  design(r, 2, X, y);
  Eigen::VectorXd coef = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  CHECK((fit.coefficients - coef).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(fit.n_used == 298);
  CHECK(fit.order == 2);

  const Eigen::VectorXd e = y - X * coef;
  const double rss = e.squaredNorm();
  const double tss = (y.array() - y.mean()).square().sum();
  const double m = static_cast<double>(y.size());
  const double adj = 1.0 - (rss / (m - 3.0)) / (tss / (m - 1.0));
  CHECK(fit.adj_r2 == doctest::Approx(adj).epsilon(1e-12));
  CHECK(fit.sigma2 == doctest::Approx(rss / (m - 3.0)).epsilon(1e-12));
}

TEST_CASE("conditioning through the presample leaves the fit unchanged") {
  Eigen::VectorXd alpha(2);
  alpha << 0.25, 0.1;
  ReturnSeries r = testutil::simulate_ar(alpha, 0.0, 200, 7);
  ReturnSeries c = condition_on(r, 2);
  ArFit full = fit_ar(r, 2);
  ArFit cond = fit_ar(c, 2);
  CHECK(full.n_used == cond.n_used);
  CHECK((full.coefficients - cond.coefficients).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("bandwidth zero reduces to White's covariance") {
  Eigen::VectorXd alpha(1);
  alpha << 0.4;
  ReturnSeries r = testutil::simulate_ar(alpha, 0.1, 250, 13);
  ArFit fit = fit_ar(r, 1, 0);
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  design(r, 1, X, y);
  const Eigen::VectorXd e = y - X * fit.coefficients;
  const Eigen::MatrixXd want = hac_oracle(X, e, 0);
  CHECK((fit.covariance - want).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fit.hac_bandwidth == 0);
}

TEST_CASE("Newey-West covariance matches the longhand sandwich") {
  Eigen::VectorXd alpha(2);
  alpha << 0.3, -0.1;
  ReturnSeries r = testutil::simulate_ar(alpha, 0.0, 220, 99);
  ArFit fit = fit_ar(r, 2, 4);
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  design(r, 2, X, y);
  const Eigen::VectorXd e = y - X * fit.coefficients;
  const Eigen::MatrixXd want = hac_oracle(X, e, 4);
  const double scale = want.cwiseAbs().maxCoeff();
  CHECK((fit.covariance - want).cwiseAbs().maxCoeff() / scale < 1e-10);
  CHECK(fit.hac_bandwidth == 4);
}

TEST_CASE("plug-in bandwidth follows the 4 (n/100)^{2/9} rule") {
  CHECK(newey_west_bandwidth(100) == 4);
  CHECK(newey_west_bandwidth(298) == 5);
  CHECK(newey_west_bandwidth(1695) == 7);
  Eigen::VectorXd alpha(2);
  alpha << 0.2, 0.1;
  ReturnSeries r = testutil::simulate_ar(alpha, 0.0, 300, 3);
  ArFit fit = fit_ar(r, 2, -1);
  CHECK(fit.hac_bandwidth == newey_west_bandwidth(fit.n_used));
}

TEST_CASE("order selection recovers a strong second lag") {
  Eigen::VectorXd alpha(2);
  alpha << 0.3, -0.4;
  ReturnSeries r = testutil::simulate_ar(alpha, 0.0, 2000, 31);
  CHECK(select_order_sbic(r, 6) == 2);

  ReturnSeries wn = testutil::simulate_ar(Eigen::VectorXd(0), 0.0, 2000, 8);
  CHECK(select_order_sbic(wn, 6) == 1);  // the search starts at order one
}

TEST_CASE("parameter constancy statistic separates stable and breaking processes") {
  Eigen::VectorXd alpha(1);
  alpha << 0.3;
  ReturnSeries stable = testutil::simulate_ar(alpha, 0.2, 600, 19);
  ArFit fit = fit_ar(stable, 1);
  HansenLcResult lc = hansen_lc(fit, stable);
  CHECK(lc.n_parameters == 3);
  CHECK(lc.critical_1pct == doctest::Approx(1.35));
  CHECK(lc.statistic < lc.critical_1pct);

  // Hard break in the lag coefficient and the noise scale halfway through.
  Eigen::VectorXd lo(1), hi(1);
  lo << 0.05;
  hi << 0.75;
  ReturnSeries a = testutil::simulate_ar(lo, 0.0, 400, 23, 1.0);
  ReturnSeries b = testutil::simulate_ar(hi, 0.0, 400, 29, 3.0);
  ReturnSeries both = a;
  both.values.insert(both.values.end(), b.values.begin(), b.values.end());
  both.dates.clear();
  Month m{1900, 1};
  for (std::size_t t = 0; t < both.values.size(); ++t) {
    both.dates.push_back(m);
    m = m.next();
  }
  ArFit bfit = fit_ar(both, 1);
  HansenLcResult blc = hansen_lc(bfit, both);
  CHECK(blc.statistic > blc.critical_1pct);
}

TEST_CASE("Lc critical value table covers one through eight parameters") {
  CHECK(hansen_lc_critical_1pct(1) == doctest::Approx(0.748));
  CHECK(hansen_lc_critical_1pct(4) == doctest::Approx(1.60));
  CHECK(hansen_lc_critical_1pct(8) == doctest::Approx(2.59));
  CHECK_THROWS_AS(hansen_lc_critical_1pct(9), ConfigError);
  CHECK_THROWS_AS(hansen_lc_critical_1pct(0), ConfigError);
}

TEST_CASE("Ljung-Box matches the longhand statistic") {
  ReturnSeries r = testutil::simulate_ar(Eigen::VectorXd::Constant(1, 0.5), 0.0, 120, 55);
  const std::vector<double>& x = r.values;
  LjungBoxResult got = ljung_box(x, 5);

  const double n = static_cast<double>(x.size());
  const double xbar = mean(x);
  double den = 0.0;
  for (double v : x) den += (v - xbar) * (v - xbar);
  double q = 0.0;
  for (int k = 1; k <= 5; ++k) {
    double num = 0.0;
    for (std::size_t t = static_cast<std::size_t>(k); t < x.size(); ++t)
      num += (x[t] - xbar) * (x[t - static_cast<std::size_t>(k)] - xbar);
    const double rho = num / den;
    q += rho * rho / (n - k);
  }
  q *= n * (n + 2.0);
  CHECK(got.statistic == doctest::Approx(q).epsilon(1e-12));
  CHECK(got.p_value == doctest::Approx(1.0 - chi2_cdf(q, 5.0)).epsilon(1e-12));
}

TEST_CASE("Ljung-Box separates white noise from persistent series") {
  ReturnSeries wn = testutil::simulate_ar(Eigen::VectorXd(0), 0.0, 400, 71);
  CHECK(ljung_box(wn.values, 12).p_value > 0.05);

  ReturnSeries ar = testutil::simulate_ar(Eigen::VectorXd::Constant(1, 0.5), 0.0, 400, 72);
  CHECK(ljung_box(ar.values, 12).p_value < 0.001);

  std::vector<double> flat(100, 3.14);
  LjungBoxResult res = ljung_box(flat, 12);
  CHECK(res.statistic == 0.0);
  CHECK(res.p_value == 1.0);
}

TEST_CASE("invalid AR requests raise config or data errors") {
  ReturnSeries r = testutil::simulate_ar(Eigen::VectorXd(0), 0.0, 30, 2);
  CHECK_THROWS_AS(fit_ar(r, 0), ConfigError);
  CHECK_THROWS_AS(select_order_sbic(r, 0), ConfigError);
  CHECK_THROWS_AS(ljung_box(r.values, 0), ConfigError);
  ReturnSeries tiny = testutil::simulate_ar(Eigen::VectorXd(0), 0.0, 4, 2);
  CHECK_THROWS_AS(fit_ar(tiny, 3), DataError);
}
