#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include "tubeflow/field.hpp"

namespace tubeflow {

/// Box constraints on the per-pixel parameters.
struct ParamBounds {
  double r_min = 0.8;
  double r_max = 8.0;
  /// Half-angles are ordered: theta1 in [0, pi/2 - margin] turns b1 to one
  /// side of -u, theta2 in [-(pi/2 - margin), 0] turns b2 to the other.
  double theta_margin = 0.05;

  double theta_max() const { return std::numbers::pi / 2.0 - theta_margin; }
  double theta1_min() const { return 0.0; }
  double theta1_max() const { return theta_max(); }
  double theta2_min() const { return -theta_max(); }
  double theta2_max() const { return 0.0; }

  /// r_min = 0.8, r_max = min(width, height) / 8.
  static ParamBounds for_image(int width, int height);
};

/// Per-pixel vessel parameters: radius r, flow direction phi (u = (cos phi,
/// sin phi)) and the bifurcation half-angles theta1, theta2. Branch
/// direction b_i is -u rotated by theta_i, so <b_i, u> = -cos(theta_i) < 0.
struct VesselParams {
  VesselParams() = default;
  VesselParams(int width, int height, ParamBounds bounds);

  int width = 0;
  int height = 0;
  ParamBounds bounds;
  std::vector<double> radius;
  std::vector<double> angle;
  std::vector<double> theta1;
  std::vector<double> theta2;

  std::size_t size() const { return radius.size(); }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }

  double branch_angle1(std::size_t i) const { return angle[i] + std::numbers::pi + theta1[i]; }
  double branch_angle2(std::size_t i) const { return angle[i] + std::numbers::pi + theta2[i]; }

  /// Clamp r and theta into bounds and wrap phi into [-pi, pi).
  void project(std::size_t i);
  void project_all();
  /// True if every parameter satisfies its bounds.
  bool in_bounds() const;

  DirectionField2D directions() const;
  ScalarField2D radius_field() const;

  /// Four channels (r, phi, theta1, theta2) for TFF1 export.
  std::vector<ScalarField2D> channels() const;
  static VesselParams from_channels(const std::vector<ScalarField2D>& channels, ParamBounds bounds);

  bool operator==(const VesselParams& other) const;
};

}  // namespace tubeflow
