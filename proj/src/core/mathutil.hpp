#pragma once

#include <Eigen/Dense>
#include <span>

namespace tvef {

double mean(std::span<const double> x);
double sample_variance(std::span<const double> x);  // divisor n - 1

struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd residuals;
  double rss = 0.0;
  Eigen::MatrixXd xtx_inverse;
};

// Plain least squares; throws NumericError on a rank-deficient design.
OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Lower regularized incomplete gamma P(a, x); series for x < a + 1,
// continued fraction otherwise.
double regularized_gamma_p(double a, double x);

double chi2_cdf(double x, double df);
double chi2_quantile(double p, double df);
double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace tvef
