#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "core/series.hpp"
#include "core/tvar.hpp"

namespace tvef {

// Moving-average coefficients of the AR(q): beta_0 = 1,
// beta_k = sum_{j=1..min(k,q)} beta_{k-j} alpha_j.
Eigen::VectorXd interim_multipliers(const Eigen::VectorXd& alpha, int horizon);

// Gradient rows d beta_k / d alpha for k = 0..horizon, from differentiating
// the recursion: G_k = beta_{k-j} 1{k>=j} + sum_i alpha_i G_{k-i}.
Eigen::MatrixXd interim_multiplier_gradients(const Eigen::VectorXd& alpha, int horizon);

// Largest absolute eigenvalue of the companion matrix; < 1 means the local
// AR is stationary.
double companion_spectral_radius(const Eigen::VectorXd& alpha);

// 1/(1 - sum alpha); throws NumericError when the companion spectral radius
// reaches one (unit or explosive root).
double longrun_multiplier(const Eigen::VectorXd& alpha);

// Gradient of the long-run multiplier: phi^2 * (1, ..., 1).
Eigen::RowVectorXd longrun_gradient(const Eigen::VectorXd& alpha);

// Delta-method standard errors; n divides the quadratic form, so pass n = 1
// when sigma_alpha is already the covariance of the estimate.
double interim_se(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& sigma_alpha, int k,
                  double n);
double longrun_se(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& sigma_alpha, double n);

struct MultiplierPath {
  Eigen::MatrixXd interim;     // T x (H+1), column k = beta_k
  Eigen::MatrixXd interim_se;  // T x (H+1), column 0 is zero
  Eigen::VectorXd longrun;     // NaN where non-stationary
  Eigen::VectorXd longrun_se;  // NaN where non-stationary
  std::vector<bool> stationary;
  double ci_level = 0.95;
  std::vector<Month> dates;
};

// Per-period multipliers and delta-method standard errors from a solved
// time-varying fit; periods with companion spectral radius >= 1 are flagged
// and their long-run values withheld.
MultiplierPath multiplier_path(const TvarFit& fit, int horizon, double ci_level);

struct BootstrapJointTest {
  double statistic = 0.0;  // sup over periods and lags of |alpha| / se
  double p_value = 1.0;    // fraction of bootstrap statistics >= observed
  int replications = 0;
};

// Residual bootstrap of the null that every AR coefficient path is zero:
// centered residuals x_t - mean are resampled i.i.d., the series rebuilt as
// mean + noise, and the model re-estimated with the fit's lambda and prior
// weight. Both the observed and bootstrap statistics standardize the paths
// with the plain weighted-least-squares covariance under a zero prior, so
// the two sides of the comparison run the identical procedure. Each
// replication seeds its own generator from (seed, replication index), so the
// result does not depend on the worker count.
BootstrapJointTest bootstrap_joint_test(const TvarFit& fit, const ReturnSeries& r,
                                        int replications, std::uint64_t seed,
                                        int workers = 1);

}  // namespace tvef
