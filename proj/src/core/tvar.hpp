#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

#include "core/month.hpp"
#include "core/series.hpp"

namespace tvef {

// Stacked regression for the random-walk-coefficient AR(q) with a constant
// intercept: observation rows x_t = a0 + z_t'a_t + u_t over state rows
// -prior = -a_1 + v_1 and 0 = a_{t-1} - a_t + v_t. Row noise variances are
// 1 (observation), 1/prior_weight (prior rows), lambda (state rows).
struct StackedSystem {
  int q = 0;
  int T = 0;
  double lambda = 0.0;
  double prior_weight = 0.0;
  Eigen::VectorXd prior;   // q
  Eigen::VectorXd obs;     // T observations after conditioning
  Eigen::MatrixXd zlags;   // T x q, row t = (x_{t-1}, ..., x_{t-q})
  std::vector<Month> dates;

  Eigen::Index rows() const { return static_cast<Eigen::Index>(T) + static_cast<Eigen::Index>(q) * T; }
  Eigen::Index cols() const { return 1 + static_cast<Eigen::Index>(q) * T; }

  // Column of coefficient ell (1-based) at period t (1-based) in the
  // period-major layout; column 0 is the intercept.
  Eigen::Index column(int ell, int t) const {
    return 1 + static_cast<Eigen::Index>(t - 1) * q + (ell - 1);
  }

  // Dense assembly, for tests and small-system cross-checks.
  Eigen::MatrixXd dense_regressor() const;
  Eigen::VectorXd dense_response() const;
  Eigen::VectorXd row_variances() const;
};

struct TvarFit {
  int q = 0;
  int T = 0;
  double intercept = 0.0;
  double intercept_se = 0.0;
  Eigen::MatrixXd paths;                       // q x T
  std::vector<Eigen::MatrixXd> covariances;    // T blocks, q x q, scaled
  Eigen::VectorXd residuals;                   // T observation residuals
  double lambda = 0.0;
  Eigen::VectorXd prior;
  double prior_weight = 0.0;
  double sigma_u2 = 0.0;                       // observation noise variance estimate
  double edf = 0.0;                            // trace of the observation hat matrix
  bool hac_applied = false;
  int hac_bandwidth = 0;
  std::vector<Month> dates;
  std::optional<Eigen::MatrixXd> full_covariance;  // (1+qT)^2, on request
};

// Conditions the series on q presample values (consuming the first q
// observations when the presample is absent) and assembles the system.
StackedSystem build_stacked(const ReturnSeries& r, int q, const Eigen::VectorXd& prior,
                            double lambda, double prior_weight);

// One weighted least-squares solve of the stacked system through a bordered
// block-tridiagonal factorization (the intercept is the dense border).
// Per-period covariance blocks are the diagonal blocks of the full bordered
// inverse scaled by the estimated observation variance.
TvarFit solve_stacked(const StackedSystem& s, bool want_full_covariance = false);

struct SmootherWeights {
  int coefficient = 0;            // 1-based lag index
  std::size_t tau = 0;            // 1-based period
  std::vector<double> weights;    // influence of each observation
  std::vector<double> cumulative; // running sum of |weights|
  std::size_t s1 = 0;             // first s with m(s) >  0.025 M (1-based)
  std::size_t s2 = 0;             // first s with m(s) >= 0.975 M
  std::size_t width = 0;          // s2 - s1
};

// Row of the estimator matrix mapping observations to one coefficient at one
// period, with the cumulative-absolute-mass window bounds.
SmootherWeights smoother_weights(const StackedSystem& s, const TvarFit& fit, int ell,
                                 std::size_t tau);

// Replaces the per-period covariance blocks and the intercept standard error
// with a Newey-West sandwich: each estimator weight row is combined with the
// Bartlett-weighted band of residual products. bandwidth < 0 selects the
// plug-in rule on T.
void apply_hac_covariance(TvarFit& fit, const StackedSystem& s, int bandwidth = -1);

std::vector<double> default_lambda_grid();  // 25 log-spaced points, 1e-6 .. 1

}  // namespace tvef
