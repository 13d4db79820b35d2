#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "core/arstatic.hpp"
#include "core/errors.hpp"
#include "core/series.hpp"
#include "core/tvar.hpp"
#include "doctest.h"
#include "testutil.hpp"

using namespace tvef;

namespace {

StackedSystem manual_system(const Eigen::VectorXd& obs, const Eigen::MatrixXd& zlags,
                            const Eigen::VectorXd& prior, double lambda, double prior_weight) {
  StackedSystem s;
  s.q = static_cast<int>(zlags.cols());
  s.T = static_cast<int>(obs.size());
  s.lambda = lambda;
  s.prior_weight = prior_weight;
  s.prior = prior;
  s.obs = obs;
  s.zlags = zlags;
  Month m{1900, 1};
  for (int t = 0; t < s.T; ++t) {
    s.dates.push_back(m);
    m = m.next();
  }
  return s;
}

StackedSystem random_system(int T, int q, double lambda, double prior_weight, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise;
  Eigen::VectorXd obs(T);
  Eigen::MatrixXd z(T, q);
  for (int t = 0; t < T; ++t) {
    obs(t) = noise(rng);
    for (int j = 0; j < q; ++j) z(t, j) = noise(rng);
  }
  Eigen::VectorXd prior(q);
  for (int j = 0; j < q; ++j) prior(j) = 0.1 * noise(rng);
  return manual_system(obs, z, prior, lambda, prior_weight);
}

// Weighted normal equations on the dense stacked design.
Eigen::VectorXd dense_solution(const StackedSystem& s) {
  const Eigen::MatrixXd X = s.dense_regressor();
  const Eigen::VectorXd y = s.dense_response();
  const Eigen::VectorXd w = s.row_variances().cwiseInverse();
  const Eigen::MatrixXd A = X.transpose() * w.asDiagonal() * X;
  return A.ldlt().solve(X.transpose() * w.asDiagonal() * y);
}

}  // namespace

TEST_CASE("the stacked design lays rows and columns out as documented") {
  Eigen::VectorXd obs(3);
  obs << 1.0, 2.0, 3.0;
  Eigen::MatrixXd z(3, 1);
  z << 0.5, -0.25, 0.125;
  Eigen::VectorXd prior = Eigen::VectorXd::Constant(1, 0.3);
  StackedSystem s = manual_system(obs, z, prior, 0.7, 2.0);

  CHECK(s.rows() == 6);
  CHECK(s.cols() == 4);
  CHECK(s.column(1, 1) == 1);
  CHECK(s.column(1, 3) == 3);

  const Eigen::MatrixXd X = s.dense_regressor();
  const Eigen::VectorXd y = s.dense_response();
  const Eigen::VectorXd v = s.row_variances();

  // Observation rows: intercept plus the period's own lag column.
  for (int t = 0; t < 3; ++t) {
    CHECK(X(t, 0) == 1.0);
    CHECK(X(t, 1 + t) == doctest::Approx(z(t, 0)));
    CHECK(y(t) == doctest::Approx(obs(t)));
    CHECK(v(t) == 1.0);
  }
  // Prior row pins the first period.
  CHECK(X(3, 1) == -1.0);
  CHECK(y(3) == doctest::Approx(-0.3));
  CHECK(v(3) == doctest::Approx(0.5));
  // Random-walk rows difference adjacent periods.
  CHECK(X(4, 1) == 1.0);
  CHECK(X(4, 2) == -1.0);
  CHECK(X(5, 2) == 1.0);
  CHECK(X(5, 3) == -1.0);
  CHECK(y(4) == 0.0);
  CHECK(v(5) == doctest::Approx(0.7));
  CHECK((X.array() != 0.0).count() == 11);
}

TEST_CASE("solver matches the dense weighted least squares solution") {
  for (auto [T, q, lambda] : {std::tuple{42, 2, 0.05}, {30, 1, 0.5}, {25, 3, 2.0}}) {
    StackedSystem s = random_system(T, q, lambda, 1.3, 1000u + static_cast<unsigned>(T));
    TvarFit fit = solve_stacked(s);
    Eigen::VectorXd dense = dense_solution(s);
    CHECK(fit.intercept == doctest::Approx(dense(0)).epsilon(1e-9));
    for (int t = 0; t < T; ++t) {
      for (int ell = 1; ell <= q; ++ell) {
        CHECK(fit.paths(ell - 1, t) ==
              doctest::Approx(dense(s.column(ell, t + 1))).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("covariance blocks and the degrees of freedom match the dense inverse") {
  StackedSystem s = random_system(36, 2, 0.2, 0.8, 77);
  TvarFit fit = solve_stacked(s, true);
  REQUIRE(fit.full_covariance.has_value());

  const Eigen::MatrixXd X = s.dense_regressor();
  const Eigen::VectorXd w = s.row_variances().cwiseInverse();
  const Eigen::MatrixXd A = X.transpose() * w.asDiagonal() * X;
  const Eigen::MatrixXd Ainv = A.ldlt().solve(Eigen::MatrixXd::Identity(A.rows(), A.cols()));

  double edf = 0.0;
  for (int t = 0; t < s.T; ++t) edf += X.row(t) * Ainv * X.row(t).transpose();
  CHECK(fit.edf == doctest::Approx(edf).epsilon(1e-8));

  const Eigen::VectorXd dense = dense_solution(s);
  double rss = 0.0;
  for (int t = 0; t < s.T; ++t) {
    const double e = s.obs(t) - X.row(t).dot(dense);
    rss += e * e;
  }
  const double sigma2 = rss / std::max(static_cast<double>(s.T) - edf, 1.0);
  CHECK(fit.sigma_u2 == doctest::Approx(sigma2).epsilon(1e-8));

  for (int t = 0; t < s.T; ++t) {
    const Eigen::MatrixXd want =
        sigma2 * Ainv.block(1 + t * s.q, 1 + t * s.q, s.q, s.q);
    const Eigen::MatrixXd got = fit.covariances[static_cast<std::size_t>(t)];
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-8 * (1.0 + want.cwiseAbs().maxCoeff()));
  }
  CHECK(fit.intercept_se == doctest::Approx(std::sqrt(sigma2 * Ainv(0, 0))).epsilon(1e-8));
  const Eigen::MatrixXd full = *fit.full_covariance;
  CHECK(full(0, 0) == doctest::Approx(sigma2 * Ainv(0, 0)).epsilon(1e-8));
}

TEST_CASE("a vanishing signal-to-noise ratio collapses onto the constant fit") {
  Eigen::VectorXd alpha(1);
  alpha << 0.4;
  ReturnSeries r = testutil::simulate_ar(alpha, 0.2, 300, 4);
  ArFit ols_fit = fit_ar(r, 1, 0);
  Eigen::VectorXd prior = ols_fit.coefficients.segment(1, 1);

  StackedSystem s = build_stacked(r, 1, prior, 1e-8, 1.0);
  TvarFit fit = solve_stacked(s);
  CHECK(fit.T == 299);
  CHECK(std::abs(fit.intercept - ols_fit.coefficients(0)) < 1e-4);
  for (int t = 0; t < fit.T; ++t) {
    CHECK(std::abs(fit.paths(0, t) - prior(0)) < 1e-4);
  }
}

TEST_CASE("a large ratio tracks the data more closely than the constant fit") {
  Eigen::VectorXd alpha(1);
  alpha << 0.3;
  ReturnSeries r = testutil::simulate_ar(alpha, 0.0, 200, 15);
  Eigen::VectorXd prior = fit_ar(r, 1, 0).coefficients.segment(1, 1);

  StackedSystem tight = build_stacked(r, 1, prior, 1e-6, 1.0);
  StackedSystem loose = build_stacked(r, 1, prior, 1e3, 1.0);
  const double rss_tight = solve_stacked(tight).residuals.squaredNorm();
  const double rss_loose = solve_stacked(loose).residuals.squaredNorm();
  CHECK(rss_loose < rss_tight);
}

TEST_CASE("estimator weights are exact derivatives of the estimate") {
  StackedSystem s = random_system(60, 2, 0.3, 1.0, 2024);
  TvarFit fit = solve_stacked(s);
  SmootherWeights w = smoother_weights(s, fit, 2, 31);
  REQUIRE(w.weights.size() == 60);

  // The estimate is linear in the observations at a fixed design, so a unit
  // change in x_s moves the coefficient by exactly w_s.
  for (int sidx : {0, 17, 31, 59}) {
    StackedSystem bumped = s;
    bumped.obs(sidx) += 1.0;
    TvarFit bfit = solve_stacked(bumped);
    const double delta = bfit.paths(1, 30) - fit.paths(1, 30);
    CHECK(delta == doctest::Approx(w.weights[static_cast<std::size_t>(sidx)]).epsilon(1e-8));
  }

  CHECK(w.coefficient == 2);
  CHECK(w.tau == 31);
  REQUIRE(w.s1 >= 1);
  REQUIRE(w.s2 >= w.s1);
  CHECK(w.width == w.s2 - w.s1);
  CHECK(w.cumulative.back() > 0.0);
}

TEST_CASE("window width shrinks as the coefficient paths get more flexible") {
  Eigen::VectorXd alpha(1);
  alpha << 0.25;
  ReturnSeries r = testutil::simulate_ar(alpha, 0.0, 300, 62);
  Eigen::VectorXd prior = fit_ar(r, 1, 0).coefficients.segment(1, 1);

  std::size_t previous = 0;
  bool first = true;
  for (double lambda : {1e-5, 1e-3, 1e-1}) {
    StackedSystem s = build_stacked(r, 1, prior, lambda, 1.0);
    TvarFit fit = solve_stacked(s);
    SmootherWeights w = smoother_weights(s, fit, 1, static_cast<std::size_t>(fit.T / 2));
    if (!first) CHECK(w.width < previous);
    previous = w.width;
    first = false;
  }
}

TEST_CASE("robust covariance at bandwidth zero is the weighted residual outer product") {
  StackedSystem s = random_system(40, 1, 0.4, 1.0, 321);
  TvarFit fit = solve_stacked(s);
  TvarFit plain = fit;

  std::vector<Eigen::VectorXd> rows;
  for (int t = 1; t <= 40; ++t) {
    SmootherWeights w = smoother_weights(s, fit, 1, static_cast<std::size_t>(t));
    rows.emplace_back(Eigen::Map<const Eigen::VectorXd>(w.weights.data(), 40));
  }

  apply_hac_covariance(fit, s, 0);
  CHECK(fit.hac_applied);
  CHECK(fit.hac_bandwidth == 0);
  for (int t = 0; t < 40; ++t) {
    double want = 0.0;
    for (int u = 0; u < 40; ++u) {
      const double wu = rows[static_cast<std::size_t>(t)](u);
      want += wu * wu * plain.residuals(u) * plain.residuals(u);
    }
    CHECK(fit.covariances[static_cast<std::size_t>(t)](0, 0) ==
          doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("robust covariance with the plug-in bandwidth stays positive") {
  StackedSystem s = random_system(120, 2, 0.2, 1.0, 555);
  TvarFit fit = solve_stacked(s);
  apply_hac_covariance(fit, s, -1);
  CHECK(fit.hac_bandwidth == newey_west_bandwidth(120));
  for (const Eigen::MatrixXd& c : fit.covariances) {
    CHECK(c(0, 0) >= 0.0);
    CHECK(c(1, 1) >= 0.0);
    CHECK(c(0, 1) == doctest::Approx(c(1, 0)).epsilon(1e-12));
  }
  CHECK(fit.intercept_se > 0.0);
}

TEST_CASE("stacked construction validates its inputs") {
  ReturnSeries r = testutil::simulate_ar(Eigen::VectorXd(0), 0.0, 50, 1);
  Eigen::VectorXd prior = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(build_stacked(r, 1, prior, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(build_stacked(r, 1, prior, -1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(build_stacked(r, 1, prior, 0.5, 0.0), ConfigError);
  CHECK_THROWS_AS(build_stacked(r, 0, Eigen::VectorXd(0), 0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(build_stacked(r, 2, prior, 0.5, 1.0), ConfigError);  // prior length

  StackedSystem s = random_system(20, 1, 0.5, 1.0, 9);
  TvarFit fit = solve_stacked(s);
  CHECK_THROWS_AS(smoother_weights(s, fit, 0, 5), ConfigError);
  CHECK_THROWS_AS(smoother_weights(s, fit, 2, 5), ConfigError);
  CHECK_THROWS_AS(smoother_weights(s, fit, 1, 0), ConfigError);
  CHECK_THROWS_AS(smoother_weights(s, fit, 1, 21), ConfigError);
}

TEST_CASE("the default grid spans six decades with 25 points") {
  std::vector<double> g = default_lambda_grid();
  REQUIRE(g.size() == 25);
  CHECK(g.front() == doctest::Approx(1e-6));
  CHECK(g.back() == doctest::Approx(1.0));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}
