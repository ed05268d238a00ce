#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ratedml/linalg.hpp"

namespace ratedml::svg {

/// Plot area height in pixels shared by the scree and scatter charts.
inline constexpr double kPlotHeight = 300.0;

/// Diverging blue-white-red fill for a correlation in [-1, 1].
std::string corr_color(double r);

/// Labelled colour-mapped matrix; each cell is a `<rect class="cell">`.
std::string corr_heatmap(const std::vector<std::string>& names, const Matrix& corr);

/// One `<rect class="bar">` per component with height ratio * kPlotHeight.
std::string pca_scree(const Vector& explained_ratio);

/// Scatter of (fitted, residual) with a `<line class="zero">` at residual 0.
std::string residuals_fitted(const std::vector<std::pair<double, double>>& points);

}  // namespace ratedml::svg
