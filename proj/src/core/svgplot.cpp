#include "core/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "core/errors.hpp"

namespace tvef {
namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 28.0;
constexpr double kTop = 44.0;
constexpr double kBottom = 52.0;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string esc(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// Affine map from data to pixels; y axes pass flipped = true.
struct Scale {
  double lo = 0.0;
  double hi = 1.0;
  double p0 = 0.0;
  double p1 = 1.0;

  double operator()(double v) const {
    double u = (v - lo) / (hi - lo);
    return p0 + u * (p1 - p0);
  }
};

// Round tick step to 1/2/5 times a power of ten.
std::vector<double> nice_ticks(double lo, double hi, int target) {
  std::vector<double> out;
  if (!(hi > lo) || target < 2) return out;
  double raw = (hi - lo) / target;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  double first = std::ceil(lo / step) * step;
  for (double v = first; v <= hi + 0.5 * step; v += step) {
    double snapped = std::abs(v) < 1e-12 * step ? 0.0 : v;
    out.push_back(snapped);
  }
  return out;
}

void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    double c = lo;
    lo = c - 1.0;
    hi = c + 1.0;
    return;
  }
  double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

std::string header(const std::string& title) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
       num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) +
       "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">" +
       esc(title) + "</text>\n";
  return s;
}

void draw_frame(std::string& s) {
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
       num(kWidth - kLeft - kRight) + "\" height=\"" + num(kHeight - kTop - kBottom) +
       "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
}

void draw_y_ticks(std::string& s, const Scale& ys, const std::vector<double>& ticks) {
  for (double v : ticks) {
    double y = ys(v);
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kWidth - kRight) +
         "\" y2=\"" + num(y) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(y + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + tick_label(v) +
         "</text>\n";
  }
}

void draw_x_label(std::string& s, double x, const std::string& label) {
  s += "<line x1=\"" + num(x) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" + num(x) +
       "\" y2=\"" + num(kHeight - kBottom + 5) + "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  s += "<text x=\"" + num(x) + "\" y=\"" + num(kHeight - kBottom + 20) +
       "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + esc(label) +
       "</text>\n";
}

std::string ramp_color(double u) {
  // Blue to pale yellow to red, linear in each half.
  auto lerp = [](int a, int b, double w) {
    return static_cast<int>(std::lround(a + (b - a) * w));
  };
  int r, g, b;
  u = std::clamp(u, 0.0, 1.0);
  if (u < 0.5) {
    double w = u / 0.5;
    r = lerp(0x31, 0xff, w);
    g = lerp(0x36, 0xff, w);
    b = lerp(0x95, 0xbf, w);
  } else {
    double w = (u - 0.5) / 0.5;
    r = lerp(0xff, 0xa5, w);
    g = lerp(0xff, 0x00, w);
    b = lerp(0xbf, 0x26, w);
  }
  char buf[10];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string svg_line_with_band(const std::vector<std::string>& x_labels,
                               const std::vector<double>& value,
                               const std::vector<double>& lower,
                               const std::vector<double>& upper,
                               const std::string& title) {
  const std::size_t n = value.size();
  if (n < 2 || x_labels.size() != n || lower.size() != n || upper.size() != n) {
    throw ConfigError("line plot needs at least two rows with matching columns");
  }

  double lo = 0.0, hi = 0.0;
  bool seen = false;
  auto take = [&](double v) {
    if (!std::isfinite(v)) return;
    if (!seen) {
      lo = hi = v;
      seen = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    take(value[i]);
    take(lower[i]);
    take(upper[i]);
  }
  if (!seen) throw ConfigError("line plot has no finite values");
  pad_range(lo, hi);

  Scale xs{0.0, static_cast<double>(n - 1), kLeft, kWidth - kRight};
  Scale ys{lo, hi, kHeight - kBottom, kTop};

  std::string s = header(title);
  draw_y_ticks(s, ys, nice_ticks(lo, hi, 6));

  // Band polygons over maximal runs where both bounds are finite.
  std::size_t i = 0;
  while (i < n) {
    while (i < n && !(std::isfinite(lower[i]) && std::isfinite(upper[i]))) ++i;
    std::size_t j = i;
    while (j < n && std::isfinite(lower[j]) && std::isfinite(upper[j])) ++j;
    if (j > i + 1) {
      std::string d = "M";
      for (std::size_t k = i; k < j; ++k) {
        d += " " + num(xs(static_cast<double>(k))) + "," + num(ys(upper[k]));
      }
      for (std::size_t k = j; k-- > i;) {
        d += " " + num(xs(static_cast<double>(k))) + "," + num(ys(lower[k]));
      }
      d += " Z";
      s += "<path d=\"" + d + "\" fill=\"#a6bddb\" fill-opacity=\"0.55\" stroke=\"none\"/>\n";
    }
    i = j;
  }

  // Value line over maximal finite runs.
  i = 0;
  while (i < n) {
    while (i < n && !std::isfinite(value[i])) ++i;
    std::size_t j = i;
    while (j < n && std::isfinite(value[j])) ++j;
    if (j > i + 1) {
      std::string pts;
      for (std::size_t k = i; k < j; ++k) {
        pts += num(xs(static_cast<double>(k))) + "," + num(ys(value[k])) + " ";
      }
      s += "<polyline points=\"" + pts +
           "\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\"/>\n";
    }
    i = j;
  }

  std::size_t stride = std::max<std::size_t>(1, n / 8);
  for (std::size_t k = 0; k < n; k += stride) {
    draw_x_label(s, xs(static_cast<double>(k)), x_labels[k]);
  }
  draw_frame(s);
  s += "</svg>\n";
  return s;
}

std::string svg_surface_long(const std::vector<std::string>& x_categories,
                             const std::vector<double>& levels,
                             const std::vector<double>& values,
                             const std::string& title) {
  const std::size_t n = values.size();
  if (n == 0 || x_categories.size() != n || levels.size() != n) {
    throw ConfigError("surface plot needs matching category, level, and value columns");
  }

  std::vector<std::string> cats;
  std::map<std::string, std::size_t> cat_index;
  for (const auto& c : x_categories) {
    if (cat_index.emplace(c, cats.size()).second) cats.push_back(c);
  }
  std::vector<double> lvls(levels);
  std::sort(lvls.begin(), lvls.end());
  lvls.erase(std::unique(lvls.begin(), lvls.end()), lvls.end());
  std::map<double, std::size_t> lvl_index;
  for (std::size_t i = 0; i < lvls.size(); ++i) lvl_index[lvls[i]] = i;

  const std::size_t ncols = cats.size();
  const std::size_t nrows = lvls.size();
  std::vector<double> grid(ncols * nrows, std::numeric_limits<double>::quiet_NaN());
  double vlo = 0.0, vhi = 0.0;
  bool seen = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(values[i])) continue;
    grid[cat_index[x_categories[i]] * nrows + lvl_index[levels[i]]] = values[i];
    if (!seen) {
      vlo = vhi = values[i];
      seen = true;
    } else {
      vlo = std::min(vlo, values[i]);
      vhi = std::max(vhi, values[i]);
    }
  }
  if (!seen) throw ConfigError("surface plot has no finite values");
  if (vhi <= vlo) vhi = vlo + 1.0;

  // Column stride keeps the cell count bounded for very long samples.
  const std::size_t max_cols = 400;
  const std::size_t stride = (ncols + max_cols - 1) / max_cols;
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < ncols; c += stride) keep.push_back(c);

  const double legend_w = 46.0;
  const double plot_w = kWidth - kLeft - kRight - legend_w;
  const double plot_h = kHeight - kTop - kBottom;
  const double cw = plot_w / static_cast<double>(keep.size());
  const double ch = plot_h / static_cast<double>(nrows);

  std::string s = header(title);
  for (std::size_t ci = 0; ci < keep.size(); ++ci) {
    for (std::size_t r = 0; r < nrows; ++r) {
      double v = grid[keep[ci] * nrows + r];
      if (!std::isfinite(v)) continue;
      double u = (v - vlo) / (vhi - vlo);
      double x = kLeft + cw * static_cast<double>(ci);
      double y = kHeight - kBottom - ch * static_cast<double>(r + 1);
      s += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cw + 0.5) +
           "\" height=\"" + num(ch + 0.5) + "\" fill=\"" + ramp_color(u) + "\"/>\n";
    }
  }

  std::size_t label_stride = std::max<std::size_t>(1, keep.size() / 8);
  for (std::size_t ci = 0; ci < keep.size(); ci += label_stride) {
    draw_x_label(s, kLeft + cw * (static_cast<double>(ci) + 0.5), cats[keep[ci]]);
  }
  std::size_t row_stride = std::max<std::size_t>(1, nrows / 6);
  for (std::size_t r = 0; r < nrows; r += row_stride) {
    double y = kHeight - kBottom - ch * (static_cast<double>(r) + 0.5);
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(y + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" +
         tick_label(lvls[r]) + "</text>\n";
  }

  // Discrete legend ramp with end labels.
  const double lx = kWidth - kRight - legend_w + 14.0;
  const int steps = 32;
  for (int i = 0; i < steps; ++i) {
    double u = (static_cast<double>(i) + 0.5) / steps;
    double y = kHeight - kBottom - plot_h * (static_cast<double>(i + 1) / steps);
    s += "<rect x=\"" + num(lx) + "\" y=\"" + num(y) + "\" width=\"14\" height=\"" +
         num(plot_h / steps + 0.5) + "\" fill=\"" + ramp_color(u) + "\"/>\n";
  }
  s += "<text x=\"" + num(lx + 18) + "\" y=\"" + num(kHeight - kBottom) +
       "\" font-family=\"sans-serif\" font-size=\"10\">" + tick_label(vlo) + "</text>\n";
  s += "<text x=\"" + num(lx + 18) + "\" y=\"" + num(kTop + 10) +
       "\" font-family=\"sans-serif\" font-size=\"10\">" + tick_label(vhi) + "</text>\n";

  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(plot_w) +
       "\" height=\"" + num(plot_h) + "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  s += "</svg>\n";
  return s;
}

std::string svg_spectrum_panel(const std::vector<double>& frequency,
                               const std::vector<double>& density,
                               std::optional<std::pair<double, double>> ci_factors,
                               const std::string& title) {
  const std::size_t n = frequency.size();
  if (n < 2 || density.size() != n) {
    throw ConfigError("spectrum plot needs matching frequency and density columns");
  }

  std::vector<double> logd(n, std::numeric_limits<double>::quiet_NaN());
  double lo = 0.0, hi = 0.0;
  bool seen = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (density[i] > 0.0 && std::isfinite(density[i])) {
      logd[i] = std::log10(density[i]);
      if (!seen) {
        lo = hi = logd[i];
        seen = true;
      } else {
        lo = std::min(lo, logd[i]);
        hi = std::max(hi, logd[i]);
      }
    }
  }
  if (!seen) throw ConfigError("spectrum plot has no positive density values");
  if (ci_factors) hi += std::log10(std::max(1.0, ci_factors->second));
  pad_range(lo, hi);

  Scale xs{0.0, 0.5, kLeft, kWidth - kRight};
  Scale ys{lo, hi, kHeight - kBottom, kTop};

  std::string s = header(title);
  draw_y_ticks(s, ys, nice_ticks(lo, hi, 6));
  for (double f : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5}) {
    draw_x_label(s, xs(f), tick_label(f));
  }
  s += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" + num(kHeight - 14) +
       "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">frequency "
       "(cycles per month), log10 density</text>\n";

  std::size_t i = 0;
  while (i < n) {
    while (i < n && !std::isfinite(logd[i])) ++i;
    std::size_t j = i;
    while (j < n && std::isfinite(logd[j])) ++j;
    if (j > i + 1) {
      std::string pts;
      for (std::size_t k = i; k < j; ++k) {
        pts += num(xs(frequency[k])) + "," + num(ys(logd[k])) + " ";
      }
      s += "<polyline points=\"" + pts +
           "\" fill=\"none\" stroke=\"#31a354\" stroke-width=\"1.2\"/>\n";
    }
    i = j;
  }

  if (ci_factors && ci_factors->first > 0.0 && ci_factors->second > ci_factors->first) {
    // Multiplicative band has constant height on the log scale; draw it as
    // the conventional cross near the top right corner.
    double cx = xs(0.45);
    double mid = hi - 0.08 * (hi - lo) - std::log10(ci_factors->second);
    double y_up = ys(mid + std::log10(ci_factors->second));
    double y_dn = ys(mid + std::log10(ci_factors->first));
    double y_mid = ys(mid);
    s += "<line x1=\"" + num(cx) + "\" y1=\"" + num(y_up) + "\" x2=\"" + num(cx) + "\" y2=\"" +
         num(y_dn) + "\" stroke=\"#de2d26\" stroke-width=\"1.5\"/>\n";
    s += "<line x1=\"" + num(cx - 7) + "\" y1=\"" + num(y_mid) + "\" x2=\"" + num(cx + 7) +
         "\" y2=\"" + num(y_mid) + "\" stroke=\"#de2d26\" stroke-width=\"1.5\"/>\n";
    s += "<text x=\"" + num(cx + 10) + "\" y=\"" + num(y_mid + 4) +
         "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#de2d26\">95%</text>\n";
  }

  draw_frame(s);
  s += "</svg>\n";
  return s;
}

}  // namespace tvef
