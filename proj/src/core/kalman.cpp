#include "core/kalman.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace tvef {

KalmanSmoothResult kalman_smooth(const Eigen::VectorXd& y, const Eigen::MatrixXd& zlags,
                                 const Eigen::VectorXd& prior_mean,
                                 const Eigen::MatrixXd& prior_cov, double lambda) {
  const Eigen::Index T = y.size();
  const Eigen::Index q = zlags.cols();
  if (zlags.rows() != T) throw ConfigError("observation and regressor lengths differ");
  if (prior_mean.size() != q || prior_cov.rows() != q || prior_cov.cols() != q) {
    throw ConfigError("prior dimensions do not match the lag order");
  }
  if (lambda <= 0.0) throw ConfigError("lambda must be positive");

  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(q, q);
  std::vector<Eigen::VectorXd> xpred(T), xfilt(T);
  std::vector<Eigen::MatrixXd> ppred(T), pfilt(T);
  Eigen::VectorXd innov(T), fvar(T);

  Eigen::VectorXd xp = prior_mean;
  Eigen::MatrixXd pp = prior_cov;
  for (Eigen::Index t = 0; t < T; ++t) {
    xpred[t] = xp;
    ppred[t] = pp;
    Eigen::VectorXd z = zlags.row(t).transpose();
    Eigen::VectorXd pz = pp * z;
    double f = z.dot(pz) + 1.0;
    if (!(f > 0.0) || !std::isfinite(f)) {
      throw NumericError("noninvertible innovation variance in the forward filter");
    }
    double e = y(t) - z.dot(xp);
    innov(t) = e;
    fvar(t) = f;
    Eigen::VectorXd k = pz / f;
    xfilt[t] = xp + k * e;
    // Joseph form keeps the filtered covariance symmetric PSD.
    Eigen::MatrixXd ikz = eye - k * z.transpose();
    pfilt[t] = ikz * pp * ikz.transpose() + k * k.transpose();
    xp = xfilt[t];
    pp = pfilt[t];
    pp.diagonal().array() += lambda;
  }

  KalmanSmoothResult out;
  out.states.resize(q, T);
  out.covariances.resize(static_cast<std::size_t>(T));
  out.innovations = innov;
  out.innovation_variances = fvar;

  Eigen::VectorXd xs = xfilt[T - 1];
  Eigen::MatrixXd ps = pfilt[T - 1];
  out.states.col(T - 1) = xs;
  out.covariances[static_cast<std::size_t>(T - 1)] = ps;
  for (Eigen::Index t = T - 2; t >= 0; --t) {
    // P_{t+1|t} = P_{t|t} + lambda I with identity transition.
    Eigen::MatrixXd pnext = pfilt[t];
    pnext.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(pnext);
    if (llt.info() != Eigen::Success) {
      throw NumericError("singular one-step covariance in the smoother");
    }
    Eigen::MatrixXd j = llt.solve(pfilt[t]).transpose();
    xs = xfilt[t] + j * (xs - xpred[t + 1]);
    ps = pfilt[t] + j * (ps - ppred[t + 1]) * j.transpose();
    out.states.col(t) = xs;
    out.covariances[static_cast<std::size_t>(t)] = 0.5 * (ps + ps.transpose());
  }
  return out;
}

namespace {

struct Conditioned {
  Eigen::VectorXd y;
  Eigen::MatrixXd zlags;
};

Conditioned condition_series(const ReturnSeries& r, int q) {
  if (q < 1) throw ConfigError("lag order must be at least 1");
  ReturnSeries s = r.presample.size() >= static_cast<std::size_t>(q) ? r : condition_on(r, q);
  Conditioned c;
  Eigen::Index T = static_cast<Eigen::Index>(s.size());
  if (T < 2) throw DataError("too few observations after conditioning");
  c.y = Eigen::Map<const Eigen::VectorXd>(s.values.data(), T);
  c.zlags.resize(T, q);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int ell = 1; ell <= q; ++ell) c.zlags(t, ell - 1) = s.lag(t, ell);
  }
  return c;
}

}  // namespace

KalmanOracleResult kalman_oracle(const ReturnSeries& r, int q, const Eigen::VectorXd& prior,
                                 const Eigen::MatrixXd& prior_cov, double lambda) {
  Conditioned c = condition_series(r, q);
  const Eigen::Index T = c.y.size();

  KalmanSmoothResult data_pass = kalman_smooth(c.y, c.zlags, prior, prior_cov, lambda);
  KalmanSmoothResult ones_pass = kalman_smooth(Eigen::VectorXd::Ones(T), c.zlags,
                                               Eigen::VectorXd::Zero(q), prior_cov, lambda);

  double rg = 0.0, rh = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    rg += c.zlags.row(t).dot(ones_pass.states.col(t));
    rh += c.zlags.row(t).dot(data_pass.states.col(t));
  }
  double s = static_cast<double>(T) - rg;
  if (!(s > 0.0)) throw NumericError("intercept concentration failed in the oracle");
  double alpha0 = (c.y.sum() - rh) / s;

  KalmanOracleResult out;
  out.intercept = alpha0;
  out.smoothed_states = data_pass.states - alpha0 * ones_pass.states;
  out.smoothed_covariances.resize(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::VectorXd gt = ones_pass.states.col(t);
    out.smoothed_covariances[static_cast<std::size_t>(t)] =
        data_pass.covariances[static_cast<std::size_t>(t)] + gt * gt.transpose() / s;
  }
  return out;
}

double prediction_error_loglik(const ReturnSeries& r, int q, const Eigen::VectorXd& prior,
                               double prior_weight, double lambda) {
  if (prior_weight <= 0.0) throw ConfigError("prior weight must be positive");
  Eigen::MatrixXd prior_cov =
      Eigen::MatrixXd::Identity(q, q) / prior_weight;
  KalmanOracleResult oracle = kalman_oracle(r, q, prior, prior_cov, lambda);

  Conditioned c = condition_series(r, q);
  Eigen::VectorXd centered = c.y.array() - oracle.intercept;
  KalmanSmoothResult pass = kalman_smooth(centered, c.zlags, prior, prior_cov, lambda);

  const Eigen::Index T = c.y.size();
  double sum_e2f = 0.0, sum_logf = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    sum_e2f += pass.innovations(t) * pass.innovations(t) / pass.innovation_variances(t);
    sum_logf += std::log(pass.innovation_variances(t));
  }
  double sigma2 = sum_e2f / static_cast<double>(T);
  if (!(sigma2 > 0.0)) throw NumericError("degenerate innovation variance");
  return -0.5 * (static_cast<double>(T) * std::log(2.0 * M_PI * sigma2) + sum_logf +
                 static_cast<double>(T));
}

LambdaSelection select_lambda_scan(const ReturnSeries& r, int q,
                                   const std::vector<double>& grid,
                                   const Eigen::VectorXd& prior, double prior_weight) {
  if (grid.empty()) throw ConfigError("lambda grid must be nonempty");
  LambdaSelection out;
  out.grid = grid;
  out.loglik.reserve(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] <= 0.0) throw ConfigError("lambda grid values must be positive");
    double ll = prediction_error_loglik(r, q, prior, prior_weight, grid[i]);
    out.loglik.push_back(ll);
    if (ll > out.loglik[best]) best = i;
  }
  out.selected = grid[best];
  return out;
}

double select_lambda(const ReturnSeries& r, int q, const std::vector<double>& grid,
                     const Eigen::VectorXd& prior, double prior_weight) {
  return select_lambda_scan(r, q, grid, prior, prior_weight).selected;
}

}  // namespace tvef
