#include "core/efficiency.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "core/errors.hpp"
#include "core/mathutil.hpp"
#include "core/textio.hpp"

namespace tvef {

Eigen::VectorXd interim_multipliers(const Eigen::VectorXd& alpha, int horizon) {
  if (horizon < 0) throw ConfigError("horizon must be non-negative");
  int q = static_cast<int>(alpha.size());
  Eigen::VectorXd beta(horizon + 1);
  beta(0) = 1.0;
  for (int k = 1; k <= horizon; ++k) {
    double acc = 0.0;
    for (int j = 1; j <= std::min(k, q); ++j) acc += beta(k - j) * alpha(j - 1);
    beta(k) = acc;
  }
  return beta;
}

Eigen::MatrixXd interim_multiplier_gradients(const Eigen::VectorXd& alpha, int horizon) {
  if (horizon < 0) throw ConfigError("horizon must be non-negative");
  int q = static_cast<int>(alpha.size());
  Eigen::VectorXd beta = interim_multipliers(alpha, horizon);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(horizon + 1, q);
  for (int k = 1; k <= horizon; ++k) {
    for (int j = 1; j <= q; ++j) {
      double acc = k >= j ? beta(k - j) : 0.0;
      for (int i = 1; i <= std::min(k, q); ++i) acc += alpha(i - 1) * g(k - i, j - 1);
      g(k, j - 1) = acc;
    }
  }
  return g;
}

namespace {

// The eigensolver puts an exact unit root at 1 +- a few ulps, so stationarity
// comparisons share this margin instead of a strict test against one.
constexpr double kUnitRootTol = 1e-12;

bool locally_stationary(const Eigen::VectorXd& alpha) {
  return companion_spectral_radius(alpha) < 1.0 - kUnitRootTol;
}

}  // namespace

double companion_spectral_radius(const Eigen::VectorXd& alpha) {
  int q = static_cast<int>(alpha.size());
  if (q == 0) throw ConfigError("empty coefficient vector");
  if (q == 1) return std::fabs(alpha(0));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(q, q);
  a.row(0) = alpha.transpose();
  for (int i = 1; i < q; ++i) a(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double longrun_multiplier(const Eigen::VectorXd& alpha) {
  if (!locally_stationary(alpha)) {
    throw NumericError("unit or explosive companion root; long-run multiplier undefined");
  }
  double denom = 1.0 - alpha.sum();
  return 1.0 / denom;
}

Eigen::RowVectorXd longrun_gradient(const Eigen::VectorXd& alpha) {
  double denom = 1.0 - alpha.sum();
  if (denom == 0.0) throw NumericError("unit root; long-run gradient undefined");
  double phi = 1.0 / denom;
  return Eigen::RowVectorXd::Constant(alpha.size(), phi * phi);
}

double interim_se(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& sigma_alpha, int k,
                  double n) {
  if (k < 0) throw ConfigError("horizon must be non-negative");
  if (sigma_alpha.rows() != alpha.size() || sigma_alpha.cols() != alpha.size()) {
    throw ConfigError("covariance dimensions do not match the coefficient vector");
  }
  if (k == 0) return 0.0;
  Eigen::MatrixXd g = interim_multiplier_gradients(alpha, k);
  Eigen::RowVectorXd gk = g.row(k);
  double v = (gk * sigma_alpha * gk.transpose())(0, 0) / n;
  return std::sqrt(std::max(v, 0.0));
}

double longrun_se(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& sigma_alpha, double n) {
  if (!locally_stationary(alpha)) {
    throw NumericError("unit or explosive companion root; long-run variance undefined");
  }
  Eigen::RowVectorXd f = longrun_gradient(alpha);
  double v = (f * sigma_alpha * f.transpose())(0, 0) / n;
  return std::sqrt(std::max(v, 0.0));
}

MultiplierPath multiplier_path(const TvarFit& fit, int horizon, double ci_level) {
  if (horizon < 0) throw ConfigError("horizon must be non-negative");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw ConfigError("ci_level must lie in (0, 1)");
  const int T = fit.T;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  MultiplierPath out;
  out.ci_level = ci_level;
  out.dates = fit.dates;
  out.interim.resize(T, horizon + 1);
  out.interim_se.resize(T, horizon + 1);
  out.longrun.resize(T);
  out.longrun_se.resize(T);
  out.stationary.resize(static_cast<std::size_t>(T));

  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd alpha = fit.paths.col(t);
    const Eigen::MatrixXd& sigma = fit.covariances[static_cast<std::size_t>(t)];
    out.interim.row(t) = interim_multipliers(alpha, horizon).transpose();
    Eigen::MatrixXd g = interim_multiplier_gradients(alpha, horizon);
    out.interim_se(t, 0) = 0.0;
    for (int k = 1; k <= horizon; ++k) {
      double v = (g.row(k) * sigma * g.row(k).transpose())(0, 0);
      out.interim_se(t, k) = std::sqrt(std::max(v, 0.0));
    }
    bool stat = locally_stationary(alpha);
    out.stationary[static_cast<std::size_t>(t)] = stat;
    if (stat) {
      out.longrun(t) = longrun_multiplier(alpha);
      out.longrun_se(t) = longrun_se(alpha, sigma, 1.0);
    } else {
      out.longrun(t) = nan;
      out.longrun_se(t) = nan;
    }
  }
  return out;
}

namespace {

// splitmix64 finalizer; keys one generator per replication so the result is
// invariant to how replications are split among workers.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

BootstrapJointTest bootstrap_joint_test(const TvarFit& fit, const ReturnSeries& r,
                                        int replications, std::uint64_t seed, int workers) {
  if (replications < 99) throw ConfigError("bootstrap needs at least 99 replications");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  const int q = fit.q;
  const double lambda = fit.lambda;
  const double pw = fit.prior_weight;

  auto statistic_of = [&](const ReturnSeries& series) {
    StackedSystem sys = build_stacked(series, q, Eigen::VectorXd::Zero(q), lambda, pw);
    TvarFit f = solve_stacked(sys);
    double sup = 0.0;
    for (int t = 0; t < f.T; ++t) {
      const Eigen::MatrixXd& c = f.covariances[static_cast<std::size_t>(t)];
      for (int ell = 0; ell < q; ++ell) {
        double se = std::sqrt(std::max(c(ell, ell), 0.0));
        if (se > 0.0) sup = std::max(sup, std::fabs(f.paths(ell, t)) / se);
      }
    }
    return sup;
  };

  BootstrapJointTest out;
  out.replications = replications;
  out.statistic = statistic_of(r);

  // Null model: white noise around the sample mean of the full series.
  std::vector<double> all(r.presample.rbegin(), r.presample.rend());
  all.insert(all.end(), r.values.begin(), r.values.end());
  const std::size_t n = all.size();
  double xbar = mean(all);
  std::vector<double> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = all[i] - xbar;

  auto exceeds = [&](int b) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(b)));
    ReturnSeries draw;
    draw.dates = r.dates;
    draw.values.resize(r.values.size());
    std::vector<double> pre(r.presample.size());
    // Index by modulo: deterministic across platforms, bias ~ n / 2^64.
    for (std::size_t i = 0; i < n; ++i) {
      double v = xbar + pool[static_cast<std::size_t>(rng() % n)];
      if (i < pre.size()) {
        pre[pre.size() - 1 - i] = v;  // presample stored most recent first
      } else {
        draw.values[i - pre.size()] = v;
      }
    }
    draw.presample = std::move(pre);
    return statistic_of(draw) >= out.statistic;
  };

  int exceed = 0;
  if (workers == 1) {
    for (int b = 0; b < replications; ++b) {
      if (exceeds(b)) ++exceed;
    }
  } else {
    std::atomic<int> total{0};
    std::atomic<int> next{0};
    std::mutex fail_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
      int local = 0;
      try {
        for (int b = next.fetch_add(1); b < replications; b = next.fetch_add(1)) {
          if (exceeds(b)) ++local;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(fail_mutex);
        if (!failure) failure = std::current_exception();
      }
      total.fetch_add(local);
    };
    std::vector<std::thread> pool_threads;
    int count = std::min(workers, replications);
    pool_threads.reserve(static_cast<std::size_t>(count));
    for (int w = 0; w < count; ++w) pool_threads.emplace_back(worker);
    for (auto& th : pool_threads) th.join();
    if (failure) std::rethrow_exception(failure);
    exceed = total.load();
  }
  out.p_value = static_cast<double>(exceed) / static_cast<double>(replications);
  return out;
}

}  // namespace tvef
