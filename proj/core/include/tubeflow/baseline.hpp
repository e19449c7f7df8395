#pragma once

#include <optional>
#include <vector>

#include "tubeflow/field.hpp"

namespace tubeflow {

enum class Polarity { bright, dark };

struct FrangiConfig {
  std::vector<double> sigmas{1.0, 2.0, 3.0, 4.0};
  double beta = 0.5;
  /// Structureness sensitivity. Empty means auto: half the maximum Hessian
  /// Frobenius norm at each scale.
  std::optional<double> c;
  Polarity polarity = Polarity::bright;

  void validate() const;
};

/// Separable Gaussian blur, kernel radius ceil(3 sigma), edge-clamped.
ScalarField2D gaussian_blur(const ScalarField2D& image, double sigma);

/// Multi-scale Frangi vesselness; max over scales, values in [0, 1).
ScalarField2D frangi2d(const ScalarField2D& image, const FrangiConfig& cfg = {});

}  // namespace tubeflow
