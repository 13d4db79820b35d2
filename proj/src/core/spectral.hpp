#pragma once

#include <span>
#include <string>
#include <vector>

namespace tvef {

struct HpDecomposition {
  std::vector<double> trend;
  std::vector<double> cycle;
  double lambda = 0.0;
};

// Hodrick-Prescott decomposition: (I + lambda D'D) trend = series with the
// second-difference matrix D, solved by a pentadiagonal Cholesky.
HpDecomposition hp_filter(std::span<const double> series, double lambda);

enum class SpectrumMethod { RawPeriodogram, SmoothedPeriodogram, ArSpectrum };

struct SpectrumEstimate {
  std::vector<double> frequency;  // cycles per month, increasing, in (0, 0.5]
  std::vector<double> density;
  SpectrumMethod method = SpectrumMethod::RawPeriodogram;
  std::vector<int> spans;         // modified-Daniell widths, empty if unsmoothed
  int ar_order = 0;               // parametric fit order, 0 otherwise
  double equivalent_dof = 2.0;
  double ci_lower_factor = 0.0;   // multiply the density for a 95% interval
  double ci_upper_factor = 0.0;
  double dominant_period_months = 0.0;  // 1 / argmax frequency
};

// Discrete Fourier periodogram |sum (x_t - mean) e^{-2 pi i j t / n}|^2 / n at
// the Fourier frequencies j/n, j = 1..floor(n/2). Optional modified-Daniell
// smoothing with the given odd span widths applied in sequence; smoothing
// operates on the full symmetric frequency circle, which reflects the
// spectrum at zero and the Nyquist frequency.
SpectrumEstimate periodogram(std::span<const double> series, bool demean = true,
                             std::span<const int> spans = {});

// Yule-Walker AR spectrum with the order chosen by AIC up to max_order;
// density sigma^2 / |1 - sum alpha_j e^{-2 pi i j f}|^2 on a 512-point grid,
// the same two-sided per-cycle normalization the periodogram uses. A
// zero-variance series yields an all-zero density by convention.
SpectrumEstimate ar_spectrum(std::span<const double> series, int max_order);

// Period (1/frequency) of the maximum density among periods >= min_period.
double dominant_period(const SpectrumEstimate& s, double min_period);

std::string spectrum_method_name(SpectrumMethod m);

}  // namespace tvef
