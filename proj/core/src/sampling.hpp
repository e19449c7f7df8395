#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "tubeflow/field.hpp"

namespace tubeflow::detail {

// Same arithmetic as sample_bilinear, without the span/bounds overhead of the
// public accessor. Kept bit-identical so results never depend on the path.
inline double bilinear(const double* data, int width, int height, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  const int x0 = std::min(static_cast<int>(x), width - 1);
  const int y0 = std::min(static_cast<int>(y), height - 1);
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double* row0 = data + static_cast<std::ptrdiff_t>(y0) * width;
  const double* row1 = data + static_cast<std::ptrdiff_t>(y1) * width;
  const double top = (1.0 - fx) * row0[x0] + fx * row0[x1];
  const double bottom = (1.0 - fx) * row1[x0] + fx * row1[x1];
  return (1.0 - fy) * top + fy * bottom;
}

inline double bilinear(const ScalarField2D& f, double x, double y) {
  return bilinear(f.values().data(), f.width(), f.height(), x, y);
}

/// Nearest pixel (round half away from zero), clamped into the grid.
inline std::size_t nearest_index(int width, int height, double x, double y) {
  const int xi = std::clamp(static_cast<int>(std::lround(x)), 0, width - 1);
  const int yi = std::clamp(static_cast<int>(std::lround(y)), 0, height - 1);
  return static_cast<std::size_t>(yi) * static_cast<std::size_t>(width) + static_cast<std::size_t>(xi);
}

}  // namespace tubeflow::detail
