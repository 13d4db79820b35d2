#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "core/series.hpp"

namespace tvef::testutil {

// Gaussian AR(q) simulator with a 100-observation burn-in; months count up
// from 1900-01.
inline ReturnSeries simulate_ar(const Eigen::VectorXd& alpha, double intercept, int n,
                                unsigned seed, double sigma = 1.0) {
  const int q = static_cast<int>(alpha.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  const int burn = 100;
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(burn + n));
  for (int t = 0; t < burn + n; ++t) {
    double v = intercept + noise(rng);
    for (int j = 1; j <= q; ++j)
      if (t - j >= 0) v += alpha(j - 1) * x[static_cast<std::size_t>(t - j)];
    x.push_back(v);
  }
  ReturnSeries r;
  r.values.assign(x.end() - n, x.end());
  Month m{1900, 1};
  for (int t = 0; t < n; ++t) {
    r.dates.push_back(m);
    m = m.next();
  }
  return r;
}

// Random stable coefficient vector: partial autocorrelations drawn in
// (-0.9, 0.9) then expanded by the Levinson recursion, so the companion
// spectral radius stays below one.
inline Eigen::VectorXd random_stable_alpha(int q, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  std::vector<double> pacf(static_cast<std::size_t>(q));
  for (auto& p : pacf) p = u(rng);
  std::vector<double> a(static_cast<std::size_t>(q), 0.0);
  std::vector<double> prev;
  for (int k = 1; k <= q; ++k) {
    prev.assign(a.begin(), a.begin() + (k - 1));
    a[static_cast<std::size_t>(k - 1)] = pacf[static_cast<std::size_t>(k - 1)];
    for (int j = 1; j < k; ++j)
      a[static_cast<std::size_t>(j - 1)] =
          prev[static_cast<std::size_t>(j - 1)] -
          pacf[static_cast<std::size_t>(k - 1)] * prev[static_cast<std::size_t>(k - 1 - j)];
  }
  Eigen::VectorXd out(q);
  for (int j = 0; j < q; ++j) out(j) = a[static_cast<std::size_t>(j)];
  return out;
}

// Kolmogorov-Smirnov distance against the uniform [0, 1] distribution.
inline double ks_uniform_distance(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double hi = (static_cast<double>(i) + 1.0) / n - u[i];
    const double lo = u[i] - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  return d;
}

}  // namespace tvef::testutil
