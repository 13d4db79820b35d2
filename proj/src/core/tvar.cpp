#include "core/tvar.hpp"

#include <cmath>
#include <string>

#include "core/arstatic.hpp"
#include "core/blocktridiag.hpp"
#include "core/errors.hpp"

namespace tvef {

Eigen::MatrixXd StackedSystem::dense_regressor() const {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(rows(), cols());
  for (int t = 0; t < T; ++t) {
    x(t, 0) = 1.0;
    for (int ell = 1; ell <= q; ++ell) x(t, column(ell, t + 1)) = zlags(t, ell - 1);
  }
  Eigen::Index row = T;
  for (int ell = 1; ell <= q; ++ell, ++row) x(row, column(ell, 1)) = -1.0;
  for (int t = 2; t <= T; ++t) {
    for (int ell = 1; ell <= q; ++ell, ++row) {
      x(row, column(ell, t - 1)) = 1.0;
      x(row, column(ell, t)) = -1.0;
    }
  }
  return x;
}

Eigen::VectorXd StackedSystem::dense_response() const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows());
  y.head(T) = obs;
  y.segment(T, q) = -prior;
  return y;
}

Eigen::VectorXd StackedSystem::row_variances() const {
  Eigen::VectorXd v(rows());
  v.head(T).setOnes();
  v.segment(T, q).setConstant(1.0 / prior_weight);
  v.tail(static_cast<Eigen::Index>(q) * (T - 1)).setConstant(lambda);
  return v;
}

StackedSystem build_stacked(const ReturnSeries& r, int q, const Eigen::VectorXd& prior,
                            double lambda, double prior_weight) {
  if (lambda <= 0.0) throw ConfigError("lambda must be positive");
  if (prior_weight <= 0.0) throw ConfigError("prior weight must be positive");
  if (q < 1) throw ConfigError("lag order must be at least 1");
  if (prior.size() != q) throw ConfigError("prior length must equal the lag order");

  ReturnSeries s = r.presample.size() >= static_cast<std::size_t>(q) ? r : condition_on(r, q);

  StackedSystem out;
  out.q = q;
  out.T = static_cast<int>(s.size());
  if (out.T < 2) throw DataError("too few observations after conditioning");
  out.lambda = lambda;
  out.prior_weight = prior_weight;
  out.prior = prior;
  out.obs = Eigen::Map<const Eigen::VectorXd>(s.values.data(), s.values.size());
  out.zlags.resize(out.T, q);
  for (int t = 0; t < out.T; ++t) {
    for (int ell = 1; ell <= q; ++ell) out.zlags(t, ell - 1) = s.lag(t, ell);
  }
  out.dates = s.dates;
  return out;
}

namespace {

struct BorderedFactor {
  BlockTridiagSolver solver;
  Eigen::VectorXd g;        // B^{-1} r, r = intercept border restricted to blocks
  double s = 0.0;           // Schur complement of the intercept column
  Eigen::VectorXd rvec;     // border column over the block coordinates
};

Eigen::VectorXd stack_border(const StackedSystem& sys) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(sys.q) * sys.T);
  for (int t = 0; t < sys.T; ++t) {
    r.segment(static_cast<Eigen::Index>(t) * sys.q, sys.q) = sys.zlags.row(t).transpose();
  }
  return r;
}

BorderedFactor factor_system(const StackedSystem& sys) {
  int q = sys.q;
  int T = sys.T;
  double mu = 1.0 / sys.lambda;
  std::vector<Eigen::MatrixXd> diag(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    Eigen::MatrixXd d = sys.zlags.row(t).transpose() * sys.zlags.row(t);
    double couplings = ((t > 0) ? 1.0 : 0.0) + ((t < T - 1) ? 1.0 : 0.0);
    d.diagonal().array() += couplings * mu;
    if (t == 0) d.diagonal().array() += sys.prior_weight;
    diag[static_cast<std::size_t>(t)] = std::move(d);
  }
  Eigen::VectorXd rvec = stack_border(sys);
  BorderedFactor f{BlockTridiagSolver(diag, mu), Eigen::VectorXd(), 0.0, rvec};
  f.g = f.solver.solve(rvec);
  f.s = static_cast<double>(T) - rvec.dot(f.g);
  if (!(f.s > 1e-10 * T)) {
    throw NumericError("intercept column nearly collinear with the coefficient columns");
  }
  return f;
}

}  // namespace

TvarFit solve_stacked(const StackedSystem& sys, bool want_full_covariance) {
  int q = sys.q;
  int T = sys.T;
  BorderedFactor f = factor_system(sys);

  Eigen::VectorXd rhs(static_cast<Eigen::Index>(q) * T);
  for (int t = 0; t < T; ++t) {
    rhs.segment(static_cast<Eigen::Index>(t) * q, q) =
        sys.zlags.row(t).transpose() * sys.obs(t);
  }
  rhs.head(q) += sys.prior_weight * sys.prior;

  Eigen::VectorXd h = f.solver.solve(rhs);
  double alpha0 = (sys.obs.sum() - f.rvec.dot(h)) / f.s;
  Eigen::VectorXd b = h - alpha0 * f.g;

  TvarFit fit;
  fit.q = q;
  fit.T = T;
  fit.intercept = alpha0;
  fit.lambda = sys.lambda;
  fit.prior = sys.prior;
  fit.prior_weight = sys.prior_weight;
  fit.dates = sys.dates;
  fit.paths.resize(q, T);
  for (int t = 0; t < T; ++t) fit.paths.col(t) = b.segment(static_cast<Eigen::Index>(t) * q, q);

  fit.residuals.resize(T);
  for (int t = 0; t < T; ++t) {
    fit.residuals(t) = sys.obs(t) - alpha0 - sys.zlags.row(t).dot(fit.paths.col(t));
  }

  // Diagonal blocks of the bordered inverse: (B^{-1})_tt + g_t g_t' / s.
  std::vector<Eigen::MatrixXd> blocks = f.solver.inverse_diagonal_blocks();
  double edf = 0.0;
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd gt = f.g.segment(static_cast<Eigen::Index>(t) * q, q);
    blocks[static_cast<std::size_t>(t)] += gt * gt.transpose() / f.s;
    Eigen::VectorXd zt = sys.zlags.row(t).transpose();
    // Hat-diagonal of observation row t against the bordered inverse.
    edf += 1.0 / f.s - 2.0 * zt.dot(gt) / f.s +
           zt.dot(blocks[static_cast<std::size_t>(t)] * zt);
  }
  fit.edf = edf;
  double denom = std::max(static_cast<double>(T) - edf, 1.0);
  fit.sigma_u2 = fit.residuals.squaredNorm() / denom;

  fit.covariances.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    fit.covariances[static_cast<std::size_t>(t)] =
        fit.sigma_u2 * blocks[static_cast<std::size_t>(t)];
  }
  fit.intercept_se = std::sqrt(fit.sigma_u2 / f.s);

  if (want_full_covariance) {
    if (sys.cols() > 2000) {
      throw ConfigError("full covariance is only materialized for small systems");
    }
    Eigen::MatrixXd x = sys.dense_regressor();
    Eigen::VectorXd v = sys.row_variances();
    Eigen::MatrixXd a = x.transpose() * v.cwiseInverse().asDiagonal() * x;
    fit.full_covariance =
        fit.sigma_u2 * a.ldlt().solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  }
  return fit;
}

namespace {

// Weight row of the estimator for the unit vector e at block column `col`:
// w_t = y_0 + z_t' y_t with (y_0, y) the bordered solve against e.
Eigen::VectorXd weight_row(const StackedSystem& sys, const BorderedFactor& f,
                           Eigen::Index col) {
  int q = sys.q;
  int T = sys.T;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q) * T);
  e(col) = 1.0;
  Eigen::VectorXd u = f.solver.solve(e);
  double y0 = -f.rvec.dot(u) / f.s;
  Eigen::VectorXd w(T);
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd yt = u.segment(static_cast<Eigen::Index>(t) * q, q) -
                         f.g.segment(static_cast<Eigen::Index>(t) * q, q) * y0;
    w(t) = y0 + sys.zlags.row(t).dot(yt);
  }
  return w;
}

}  // namespace

SmootherWeights smoother_weights(const StackedSystem& sys, const TvarFit& fit, int ell,
                                 std::size_t tau) {
  if (ell < 1 || ell > sys.q) throw ConfigError("coefficient index out of range");
  if (tau < 1 || tau > static_cast<std::size_t>(sys.T)) {
    throw ConfigError("period index out of range");
  }
  if (fit.q != sys.q || fit.T != sys.T) throw ConfigError("fit does not match the system");

  BorderedFactor f = factor_system(sys);
  Eigen::Index col = static_cast<Eigen::Index>(tau - 1) * sys.q + (ell - 1);
  Eigen::VectorXd w = weight_row(sys, f, col);

  SmootherWeights out;
  out.coefficient = ell;
  out.tau = tau;
  out.weights.assign(w.data(), w.data() + w.size());
  out.cumulative.resize(out.weights.size());
  double m = 0.0;
  for (std::size_t i = 0; i < out.weights.size(); ++i) {
    m += std::fabs(out.weights[i]);
    out.cumulative[i] = m;
  }
  double total = out.cumulative.back();
  if (!(total > 0.0)) throw NumericError("degenerate weight row");
  out.s1 = 0;
  out.s2 = 0;
  for (std::size_t i = 0; i < out.cumulative.size(); ++i) {
    if (out.s1 == 0 && out.cumulative[i] > 0.025 * total) out.s1 = i + 1;
    if (out.s2 == 0 && out.cumulative[i] >= 0.975 * total) out.s2 = i + 1;
  }
  out.width = out.s2 - out.s1;
  return out;
}

void apply_hac_covariance(TvarFit& fit, const StackedSystem& sys, int bandwidth) {
  int q = sys.q;
  int T = sys.T;
  if (fit.q != q || fit.T != T) throw ConfigError("fit does not match the system");
  int L = bandwidth < 0 ? newey_west_bandwidth(static_cast<std::size_t>(T)) : bandwidth;

  BorderedFactor f = factor_system(sys);
  const Eigen::VectorXd& u = fit.residuals;
  Eigen::VectorXd bart(L + 1);
  for (int j = 0; j <= L; ++j) bart(j) = 1.0 - static_cast<double>(j) / (L + 1.0);

  // (Omega v)_s = u_s sum_{|d| <= L} bart_|d| u_{s+d} v_{s+d}.
  auto omega_apply = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd y(T);
    for (int t = 0; t < T; ++t) {
      double acc = 0.0;
      int lo = std::max(0, t - L);
      int hi = std::min(T - 1, t + L);
      for (int tt = lo; tt <= hi; ++tt) acc += bart(std::abs(t - tt)) * u(tt) * v(tt);
      y(t) = u(t) * acc;
    }
    return y;
  };

  for (int t = 1; t <= T; ++t) {
    Eigen::MatrixXd rows(q, T);
    for (int ell = 1; ell <= q; ++ell) {
      Eigen::Index col = static_cast<Eigen::Index>(t - 1) * q + (ell - 1);
      rows.row(ell - 1) = weight_row(sys, f, col).transpose();
    }
    Eigen::MatrixXd v(q, q);
    for (int j = 0; j < q; ++j) {
      Eigen::VectorXd oy = omega_apply(rows.row(j).transpose());
      for (int i = 0; i < q; ++i) v(i, j) = rows.row(i).dot(oy);
    }
    fit.covariances[static_cast<std::size_t>(t - 1)] = 0.5 * (v + v.transpose());
  }

  Eigen::VectorXd w0(T);
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd gt = f.g.segment(static_cast<Eigen::Index>(t) * q, q);
    w0(t) = (1.0 - sys.zlags.row(t).dot(gt)) / f.s;
  }
  fit.intercept_se = std::sqrt(w0.dot(omega_apply(w0)));
  fit.hac_applied = true;
  fit.hac_bandwidth = L;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> g;
  g.reserve(25);
  for (int i = 0; i < 25; ++i) g.push_back(std::pow(10.0, -6.0 + 6.0 * i / 24.0));
  return g;
}

}  // namespace tvef
