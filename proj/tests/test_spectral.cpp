#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "core/errors.hpp"
#include "core/mathutil.hpp"
#include "core/spectral.hpp"
#include "doctest.h"
#include "testutil.hpp"

using namespace tvef;

namespace {

std::vector<double> gaussian_noise(std::size_t n, unsigned seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = noise(rng);
  return x;
}

// Modified-Daniell kernel sequence convolved longhand.
std::vector<double> kernel_oracle(const std::vector<int>& spans) {
  std::vector<double> kernel{1.0};
  for (int w : spans) {
    const int m = (w - 1) / 2;
    std::vector<double> base(static_cast<std::size_t>(w));
    for (int i = -m; i <= m; ++i) {
      base[static_cast<std::size_t>(i + m)] =
          std::abs(i) == m ? 1.0 / (4.0 * m) : 1.0 / (2.0 * m);
    }
    std::vector<double> next(kernel.size() + base.size() - 1, 0.0);
    for (std::size_t a = 0; a < kernel.size(); ++a) {
      for (std::size_t b = 0; b < base.size(); ++b) next[a + b] += kernel[a] * base[b];
    }
    kernel = std::move(next);
  }
  return kernel;
}

}  // namespace

TEST_CASE("HP filter reproduces a linear trend exactly and adds up") {
  std::vector<double> x(60);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = 3.0 - 0.25 * static_cast<double>(t);
  HpDecomposition d = hp_filter(x, 1600.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    CHECK(d.trend[t] == doctest::Approx(x[t]).epsilon(1e-9));
    CHECK(d.cycle[t] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  }

  std::vector<double> y = gaussian_noise(200, 10);
  HpDecomposition dy = hp_filter(y, 129600.0);
  for (std::size_t t = 0; t < y.size(); ++t) {
    CHECK(dy.trend[t] + dy.cycle[t] == doctest::Approx(y[t]).epsilon(1e-12));
  }
}

TEST_CASE("HP filter sends a short cycle to the cyclical component") {
  const std::size_t n = 400;
  std::vector<double> x(n), sine(n);
  for (std::size_t t = 0; t < n; ++t) {
    sine[t] = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 40.0);
    x[t] = 5.0 + 0.01 * static_cast<double>(t) + sine[t];
  }
  HpDecomposition d = hp_filter(x, 129600.0);

  // Correlation between the extracted cycle and the sine input, away from the
  // endpoints where the filter's loose boundary distorts the trend.
  const std::size_t lo = 60, hi = n - 60;
  double cs = 0.0, cc = 0.0, ss = 0.0, cbar = 0.0, sbar = 0.0;
  for (std::size_t t = lo; t < hi; ++t) {
    cbar += d.cycle[t];
    sbar += sine[t];
  }
  cbar /= static_cast<double>(hi - lo);
  sbar /= static_cast<double>(hi - lo);
  for (std::size_t t = lo; t < hi; ++t) {
    cs += (d.cycle[t] - cbar) * (sine[t] - sbar);
    cc += (d.cycle[t] - cbar) * (d.cycle[t] - cbar);
    ss += (sine[t] - sbar) * (sine[t] - sbar);
  }
  CHECK(cs / std::sqrt(cc * ss) > 0.99);

  // The trend keeps the drift: it should be monotune up to a small ripple.
  CHECK(d.trend[n - 1] - d.trend[0] > 2.0);
}

TEST_CASE("HP filter validates its inputs") {
  std::vector<double> x = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(hp_filter(x, 1600.0), DataError);
  std::vector<double> y(10, 1.0);
  CHECK_THROWS_AS(hp_filter(y, 0.0), ConfigError);
  CHECK_THROWS_AS(hp_filter(y, -5.0), ConfigError);
}

TEST_CASE("periodogram ordinates satisfy Parseval for odd lengths") {
  std::vector<double> x = gaussian_noise(255, 4);
  SpectrumEstimate est = periodogram(x);
  REQUIRE(est.frequency.size() == 127);
  double total = 0.0;
  for (double v : est.density) total += v;
  const double mean_ordinate = total / static_cast<double>(est.density.size());
  CHECK(mean_ordinate == doctest::Approx(sample_variance(x)).epsilon(1e-10));
  CHECK(est.equivalent_dof == 2.0);
  CHECK(est.method == SpectrumMethod::RawPeriodogram);
}

TEST_CASE("a pure cosine concentrates at its own Fourier frequency") {
  const std::size_t n = 200;
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) {
    x[t] = std::cos(2.0 * std::numbers::pi * 10.0 * static_cast<double>(t) / static_cast<double>(n));
  }
  SpectrumEstimate est = periodogram(x);
  REQUIRE(est.frequency.size() == 100);
  for (std::size_t j = 0; j < est.density.size(); ++j) {
    if (j == 9) {
      CHECK(est.density[j] == doctest::Approx(static_cast<double>(n) / 4.0).epsilon(1e-8));
    } else {
      CHECK(est.density[j] < 1e-8);
    }
  }
  CHECK(est.frequency[9] == doctest::Approx(0.05));
  CHECK(est.dominant_period_months == doctest::Approx(20.0));
}

TEST_CASE("smoothing equals a circular convolution of the raw circle") {
  for (std::size_t n : {64u, 65u}) {
    std::vector<double> x = gaussian_noise(n, 1000 + static_cast<unsigned>(n));
    SpectrumEstimate raw = periodogram(x);
    std::vector<int> spans = {3, 5};
    SpectrumEstimate sm = periodogram(x, true, spans);

    // Rebuild the symmetric circle: index 0 is zero after demeaning.
    std::vector<double> full(n, 0.0);
    for (std::size_t j = 1; j <= n / 2; ++j) {
      full[j] = raw.density[j - 1];
      if (j != n - j) full[n - j] = full[j];
    }
    std::vector<double> kernel = kernel_oracle(spans);
    const std::ptrdiff_t hw = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    for (std::size_t j = 1; j <= n / 2; ++j) {
      double want = 0.0;
      for (std::ptrdiff_t o = -hw; o <= hw; ++o) {
        std::ptrdiff_t idx =
            (static_cast<std::ptrdiff_t>(j) + o) % static_cast<std::ptrdiff_t>(n);
        if (idx < 0) idx += static_cast<std::ptrdiff_t>(n);
        want += kernel[static_cast<std::size_t>(o + hw)] * full[static_cast<std::size_t>(idx)];
      }
      CHECK(sm.density[j - 1] == doctest::Approx(want).epsilon(1e-12));
    }

    double ssq = 0.0;
    for (double g : kernel) ssq += g * g;
    CHECK(sm.equivalent_dof == doctest::Approx(2.0 / ssq).epsilon(1e-12));
    CHECK(sm.method == SpectrumMethod::SmoothedPeriodogram);
    REQUIRE(sm.spans.size() == 2);
  }
}

TEST_CASE("confidence factors come from the chi-square quantiles") {
  std::vector<double> x = gaussian_noise(128, 77);
  std::vector<int> spans = {7, 7};
  SpectrumEstimate est = periodogram(x, true, spans);
  const double dof = est.equivalent_dof;
  CHECK(dof > 2.0);
  CHECK(est.ci_lower_factor == doctest::Approx(dof / chi2_quantile(0.975, dof)).epsilon(1e-12));
  CHECK(est.ci_upper_factor == doctest::Approx(dof / chi2_quantile(0.025, dof)).epsilon(1e-12));
  CHECK(est.ci_lower_factor < 1.0);
  CHECK(est.ci_upper_factor > 1.0);
}

TEST_CASE("white noise has a uniform cumulative periodogram") {
  std::vector<double> x = gaussian_noise(1025, 31);
  SpectrumEstimate est = periodogram(x);
  double total = 0.0;
  for (double v : est.density) total += v;
  std::vector<double> u;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < est.density.size(); ++i) {
    acc += est.density[i];
    u.push_back(acc / total);
  }
  const double d = testutil::ks_uniform_distance(std::move(u));
  CHECK(d < 1.63 / std::sqrt(static_cast<double>(est.density.size())));
}

TEST_CASE("periodogram rejects short series and bad spans") {
  std::vector<double> x = gaussian_noise(7, 5);
  CHECK_THROWS_AS(periodogram(x), DataError);
  std::vector<double> y = gaussian_noise(64, 6);
  std::vector<int> even = {4};
  CHECK_THROWS_AS(periodogram(y, true, even), ConfigError);
  std::vector<int> tiny = {1};
  CHECK_THROWS_AS(periodogram(y, true, tiny), ConfigError);
}

TEST_CASE("a constant series has an empty spectrum and an infinite dominant period") {
  std::vector<double> x(32, 2.5);
  SpectrumEstimate est = periodogram(x);
  for (double v : est.density) CHECK(v == doctest::Approx(0.0).scale(1.0).epsilon(1e-18));
  CHECK(std::isinf(est.dominant_period_months));

  SpectrumEstimate ar = ar_spectrum(x, 8);
  CHECK(ar.ar_order == 0);
  for (double v : ar.density) CHECK(v == 0.0);
  CHECK(std::isinf(ar.dominant_period_months));
}

TEST_CASE("the AR spectrum of strong persistence has the right low-to-high ratio") {
  ReturnSeries r = testutil::simulate_ar(Eigen::VectorXd::Constant(1, 0.9), 0.0, 5000, 12);
  SpectrumEstimate est = ar_spectrum(r.values, 12);
  REQUIRE(est.frequency.size() == 512);
  CHECK(est.ar_order >= 1);
  CHECK(est.frequency.front() == doctest::Approx(1.0 / 1024.0));
  CHECK(est.frequency.back() == doctest::Approx(0.5));
  const double ratio = est.density.front() / est.density.back();
  const double want = std::pow(1.9 / 0.1, 2.0);
  CHECK(ratio == doctest::Approx(want).epsilon(0.25));
  CHECK(est.dominant_period_months == doctest::Approx(1024.0));
}

TEST_CASE("the AR spectrum integrates to the sample variance") {
  ReturnSeries r = testutil::simulate_ar(Eigen::VectorXd::Constant(1, 0.5), 0.0, 5000, 44);
  SpectrumEstimate est = ar_spectrum(r.values, 12);
  double sum = 0.0;
  for (double v : est.density) sum += v;
  const double integral = sum / 512.0;  // two-sided, grid spacing 1/1024
  const double xbar = mean(r.values);
  double c0 = 0.0;
  for (double v : r.values) c0 += (v - xbar) * (v - xbar);
  c0 /= static_cast<double>(r.values.size());
  CHECK(integral == doctest::Approx(c0).epsilon(0.05));
}

TEST_CASE("the AR spectrum of white noise is nearly flat") {
  std::vector<double> x = gaussian_noise(2000, 90);
  SpectrumEstimate est = ar_spectrum(x, 20);
  const auto [lo, hi] = std::minmax_element(est.density.begin(), est.density.end());
  CHECK(*hi / *lo < 2.0);
  CHECK(est.ar_order <= 2);
}

TEST_CASE("ar_spectrum rejects impossible orders") {
  std::vector<double> x = gaussian_noise(30, 2);
  CHECK_THROWS_AS(ar_spectrum(x, 25), DataError);
  CHECK_THROWS_AS(ar_spectrum(x, -1), ConfigError);
}

TEST_CASE("dominant period restriction and tie breaking") {
  SpectrumEstimate s;
  s.frequency = {0.1, 0.2, 0.25};
  s.density = {1.0, 3.0, 3.0};
  CHECK(dominant_period(s, 3.0) == doctest::Approx(5.0));   // first maximizer wins
  CHECK(dominant_period(s, 6.0) == doctest::Approx(10.0));  // only f = 0.1 has period >= 6
  CHECK_THROWS_AS(dominant_period(s, 11.0), ConfigError);
  CHECK_THROWS_AS(dominant_period(s, 2.0), ConfigError);

  SpectrumEstimate flat;
  flat.frequency = {0.1, 0.2};
  flat.density = {0.0, 0.0};
  CHECK(std::isinf(dominant_period(flat, 3.0)));
}

TEST_CASE("method names are stable identifiers") {
  CHECK(spectrum_method_name(SpectrumMethod::RawPeriodogram) == "raw_periodogram");
  CHECK(spectrum_method_name(SpectrumMethod::SmoothedPeriodogram) == "smoothed_periodogram");
  CHECK(spectrum_method_name(SpectrumMethod::ArSpectrum) == "ar_spectrum");
}
