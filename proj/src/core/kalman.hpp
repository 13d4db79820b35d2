#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/series.hpp"

namespace tvef {

struct KalmanSmoothResult {
  Eigen::MatrixXd states;                    // q x T smoothed means
  std::vector<Eigen::MatrixXd> covariances;  // T smoothed covariance blocks
  Eigen::VectorXd innovations;               // one-step prediction errors
  Eigen::VectorXd innovation_variances;      // with unit observation noise
};

// Forward filter plus Rauch-Tung-Striebel smoother for the local-level
// coefficient model: state a_t = a_{t-1} + v_t with Var v = lambda I,
// observation y_t = z_t'a_t + u_t with Var u = 1, initial a_1 ~
// (prior_mean, prior_cov).
KalmanSmoothResult kalman_smooth(const Eigen::VectorXd& y, const Eigen::MatrixXd& zlags,
                                 const Eigen::VectorXd& prior_mean,
                                 const Eigen::MatrixXd& prior_cov, double lambda);

struct KalmanOracleResult {
  Eigen::MatrixXd smoothed_states;                    // q x T
  std::vector<Eigen::MatrixXd> smoothed_covariances;  // unscaled, intercept-adjusted
  double intercept = 0.0;
};

// Sequential-algebra twin of the stacked solve, used as an independent
// oracle. The constant intercept is concentrated out with two smoothing
// passes: the data pass gives h = B^{-1}(Z'x + P0^{-1} prior) and a
// ones-response pass with zero prior mean gives g = B^{-1}Z'1, from which
// intercept = (sum x - r'h)/(T - r'g) and the paths h - intercept * g. The
// covariance blocks carry the intercept-uncertainty term g g'/s so they equal
// the diagonal blocks of the full bordered inverse.
KalmanOracleResult kalman_oracle(const ReturnSeries& r, int q, const Eigen::VectorXd& prior,
                                 const Eigen::MatrixXd& prior_cov, double lambda);

// Gaussian prediction-error log-likelihood with the intercept concentrated
// out by the oracle and the observation variance concentrated analytically.
double prediction_error_loglik(const ReturnSeries& r, int q, const Eigen::VectorXd& prior,
                               double prior_weight, double lambda);

struct LambdaSelection {
  double selected = 0.0;
  std::vector<double> grid;
  std::vector<double> loglik;
};

LambdaSelection select_lambda_scan(const ReturnSeries& r, int q,
                                   const std::vector<double>& grid,
                                   const Eigen::VectorXd& prior, double prior_weight);

double select_lambda(const ReturnSeries& r, int q, const std::vector<double>& grid,
                     const Eigen::VectorXd& prior, double prior_weight);

}  // namespace tvef
