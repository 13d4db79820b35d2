#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tvef {

// Standalone SVG renderers for the three artifact kinds the pipeline plots.
// Output depends only on the inputs; coordinates are rounded to fixed
// precision so reruns are byte comparable.

// Series with a shaded band. NaN points break the line and the band.
std::string svg_line_with_band(const std::vector<std::string>& x_labels,
                               const std::vector<double>& value,
                               const std::vector<double>& lower,
                               const std::vector<double>& upper,
                               const std::string& title);

// Long-format (x category, level, value) triples rendered as a colored grid.
// Categories keep first-appearance order, levels sort ascending. Wide grids
// are column-downsampled to keep the file small.
std::string svg_surface_long(const std::vector<std::string>& x_categories,
                             const std::vector<double>& levels,
                             const std::vector<double>& values,
                             const std::string& title);

// Log-density spectrum panel; the optional pair is (lower, upper)
// multiplicative confidence factors drawn as the usual cross marker.
std::string svg_spectrum_panel(const std::vector<double>& frequency,
                               const std::vector<double>& density,
                               std::optional<std::pair<double, double>> ci_factors,
                               const std::string& title);

}  // namespace tvef
