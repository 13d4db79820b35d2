#include "core/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "core/errors.hpp"
#include "core/mathutil.hpp"

namespace tvef {

HpDecomposition hp_filter(std::span<const double> series, double lambda) {
  const std::size_t n = series.size();
  if (n < 4) throw DataError("HP filter needs at least four observations");
  if (lambda <= 0.0) throw ConfigError("HP lambda must be positive");

  // Band of I + lambda D'D: symmetric pentadiagonal. d0/d1/d2 hold the main,
  // first, and second diagonals.
  std::vector<double> d0(n, 1.0), d1(n - 1, 0.0), d2(n - 2, lambda);
  for (std::size_t i = 0; i + 2 < n; ++i) {
    d0[i] += lambda;
    d0[i + 1] += 4.0 * lambda;
    d0[i + 2] += lambda;
    d1[i] += -2.0 * lambda;
    d1[i + 1] += -2.0 * lambda;
  }

  // In-place banded LDL^T, bandwidth 2.
  std::vector<double> l1(n - 1, 0.0), l2(n - 2, 0.0), d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double di = d0[i];
    if (i >= 1) di -= l1[i - 1] * l1[i - 1] * d[i - 1];
    if (i >= 2) di -= l2[i - 2] * l2[i - 2] * d[i - 2];
    if (di <= 0.0) throw NumericError("HP system lost positive definiteness");
    d[i] = di;
    if (i + 1 < n) {
      double e = d1[i];
      if (i >= 1) e -= l1[i - 1] * d[i - 1] * l2[i - 1];
      l1[i] = e / di;
    }
    if (i + 2 < n) l2[i] = d2[i] / di;
  }

  std::vector<double> y(series.begin(), series.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 1) y[i] -= l1[i - 1] * y[i - 1];
    if (i >= 2) y[i] -= l2[i - 2] * y[i - 2];
  }
  for (std::size_t i = 0; i < n; ++i) y[i] /= d[i];
  for (std::size_t k = n; k-- > 0;) {
    if (k + 1 < n) y[k] -= l1[k] * y[k + 1];
    if (k + 2 < n) y[k] -= l2[k] * y[k + 2];
  }

  HpDecomposition out;
  out.lambda = lambda;
  out.trend = std::move(y);
  out.cycle.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.cycle[i] = series[i] - out.trend[i];
  return out;
}

namespace {

// Combined smoothing kernel for a sequence of modified-Daniell spans; each
// span is an odd width w = 2m+1 with weights 1/(2m) inside and 1/(4m) at the
// ends, and successive spans convolve.
std::vector<double> daniell_kernel(std::span<const int> spans) {
  std::vector<double> kernel{1.0};
  for (int w : spans) {
    if (w < 3 || w % 2 == 0) throw ConfigError("Daniell spans must be odd and at least 3");
    int m = (w - 1) / 2;
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

void finish_ci(SpectrumEstimate& s) {
  double dof = s.equivalent_dof;
  s.ci_lower_factor = dof / chi2_quantile(0.975, dof);
  s.ci_upper_factor = dof / chi2_quantile(0.025, dof);
}

void finish_dominant(SpectrumEstimate& s) {
  double best = -1.0;
  std::size_t arg = 0;
  bool any = false;
  for (std::size_t i = 0; i < s.density.size(); ++i) {
    if (s.density[i] > best) {
      best = s.density[i];
      arg = i;
      any = true;
    }
  }
  if (!any || best <= 0.0) {
    s.dominant_period_months = std::numeric_limits<double>::infinity();
    return;
  }
  s.dominant_period_months = 1.0 / s.frequency[arg];
}

}  // namespace

SpectrumEstimate periodogram(std::span<const double> series, bool demean,
                             std::span<const int> spans) {
  const std::size_t n = series.size();
  if (n < 8) throw DataError("periodogram needs at least eight observations");

  double xbar = demean ? mean(series) : 0.0;
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = series[t] - xbar;

  // Exact twiddle table: e^{-2 pi i k / n} for k = 0..n-1; index j*t mod n.
  std::vector<double> ct(n), st(n);
  for (std::size_t k = 0; k < n; ++k) {
    double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    ct[k] = std::cos(a);
    st[k] = std::sin(a);
  }

  // Full circle of ordinates; I(0) of a demeaned series is identically zero
  // and I(n-j) = I(j), so only j = 0..n/2 need the direct sum.
  const std::size_t half = n / 2;
  std::vector<double> full(n, 0.0);
  if (!demean) {
    double s = 0.0;
    for (double v : x) s += v;
    full[0] = s * s / static_cast<double>(n);
  }
  for (std::size_t j = 1; j <= half; ++j) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      std::size_t k = (j * t) % n;
      re += x[t] * ct[k];
      im -= x[t] * st[k];
    }
    full[j] = (re * re + im * im) / static_cast<double>(n);
    if (j != n - j) full[n - j] = full[j];
  }

  SpectrumEstimate out;
  out.method = spans.empty() ? SpectrumMethod::RawPeriodogram : SpectrumMethod::SmoothedPeriodogram;
  out.spans.assign(spans.begin(), spans.end());

  std::vector<double> smoothed(half);
  if (spans.empty()) {
    for (std::size_t j = 1; j <= half; ++j) smoothed[j - 1] = full[j];
    out.equivalent_dof = 2.0;
  } else {
    std::vector<double> kernel = daniell_kernel(spans);
    std::ptrdiff_t hw = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    for (std::size_t j = 1; j <= half; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t o = -hw; o <= hw; ++o) {
        std::ptrdiff_t idx = (static_cast<std::ptrdiff_t>(j) + o) % static_cast<std::ptrdiff_t>(n);
        if (idx < 0) idx += static_cast<std::ptrdiff_t>(n);
        acc += kernel[static_cast<std::size_t>(o + hw)] * full[static_cast<std::size_t>(idx)];
      }
      smoothed[j - 1] = acc;
    }
    double ssq = 0.0;
    for (double g : kernel) ssq += g * g;
    out.equivalent_dof = 2.0 / ssq;
  }

  out.frequency.resize(half);
  for (std::size_t j = 1; j <= half; ++j) {
    out.frequency[j - 1] = static_cast<double>(j) / static_cast<double>(n);
  }
  out.density = std::move(smoothed);
  finish_ci(out);
  finish_dominant(out);
  return out;
}

SpectrumEstimate ar_spectrum(std::span<const double> series, int max_order) {
  const std::size_t n = series.size();
  if (max_order < 0) throw ConfigError("max_order must be non-negative");
  if (n <= static_cast<std::size_t>(max_order) + 10) {
    throw DataError("series too short for the requested AR order");
  }

  double xbar = mean(series);
  std::vector<double> c(static_cast<std::size_t>(max_order) + 1, 0.0);
  for (int k = 0; k <= max_order; ++k) {
    double acc = 0.0;
    for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) {
      acc += (series[t] - xbar) * (series[t - static_cast<std::size_t>(k)] - xbar);
    }
    c[static_cast<std::size_t>(k)] = acc / static_cast<double>(n);
  }

  SpectrumEstimate out;
  out.method = SpectrumMethod::ArSpectrum;

  const std::size_t grid = 512;
  out.frequency.resize(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    out.frequency[i] = static_cast<double>(i + 1) / (2.0 * static_cast<double>(grid));
  }
  out.density.assign(grid, 0.0);
  out.equivalent_dof = 2.0;

  if (c[0] <= 0.0) {
    out.ar_order = 0;
    finish_ci(out);
    finish_dominant(out);
    return out;
  }

  // Levinson-Durbin over all orders, tracking AIC = n ln v_p + 2 (p+1).
  std::vector<double> best_a;
  double best_v = c[0];
  int best_p = 0;
  double best_aic = static_cast<double>(n) * std::log(c[0]) + 2.0;

  std::vector<double> a;
  double v = c[0];
  for (int p = 1; p <= max_order; ++p) {
    double acc = c[static_cast<std::size_t>(p)];
    for (int j = 1; j < p; ++j) acc -= a[static_cast<std::size_t>(j - 1)] * c[static_cast<std::size_t>(p - j)];
    double kappa = acc / v;
    std::vector<double> next(static_cast<std::size_t>(p));
    for (int j = 1; j < p; ++j) {
      next[static_cast<std::size_t>(j - 1)] =
          a[static_cast<std::size_t>(j - 1)] - kappa * a[static_cast<std::size_t>(p - 1 - j)];
    }
    next[static_cast<std::size_t>(p - 1)] = kappa;
    a = std::move(next);
    v *= (1.0 - kappa * kappa);
    if (v <= 0.0) break;
    double aic = static_cast<double>(n) * std::log(v) + 2.0 * (static_cast<double>(p) + 1.0);
    if (aic < best_aic) {
      best_aic = aic;
      best_a = a;
      best_v = v;
      best_p = p;
    }
  }

  out.ar_order = best_p;
  for (std::size_t i = 0; i < grid; ++i) {
    double f = out.frequency[i];
    double re = 1.0, im = 0.0;
    for (int j = 1; j <= best_p; ++j) {
      double a2 = 2.0 * std::numbers::pi * f * static_cast<double>(j);
      re -= best_a[static_cast<std::size_t>(j - 1)] * std::cos(a2);
      im += best_a[static_cast<std::size_t>(j - 1)] * std::sin(a2);
    }
    out.density[i] = best_v / (re * re + im * im);
  }
  finish_ci(out);
  finish_dominant(out);
  return out;
}

double dominant_period(const SpectrumEstimate& s, double min_period) {
  if (!(min_period > 2.0)) throw ConfigError("min_period must exceed two months");
  double best = -1.0;
  double arg_freq = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < s.frequency.size(); ++i) {
    if (1.0 / s.frequency[i] < min_period) continue;
    any = true;
    if (s.density[i] > best) {
      best = s.density[i];
      arg_freq = s.frequency[i];
    }
  }
  if (!any) throw ConfigError("no spectrum frequencies have period >= min_period");
  if (best <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / arg_freq;
}

std::string spectrum_method_name(SpectrumMethod m) {
  switch (m) {
    case SpectrumMethod::RawPeriodogram: return "raw_periodogram";
    case SpectrumMethod::SmoothedPeriodogram: return "smoothed_periodogram";
    case SpectrumMethod::ArSpectrum: return "ar_spectrum";
  }
  return "unknown";
}

}  // namespace tvef
