#include "tubeflow/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tubeflow {

ParamBounds ParamBounds::for_image(int width, int height) {
  ParamBounds b;
  b.r_max = std::min(width, height) / 8.0;
  if (b.r_max <= b.r_min) throw std::invalid_argument("ParamBounds: image too small for default radius range");
  return b;
}

VesselParams::VesselParams(int w, int h, ParamBounds b) : width(w), height(h), bounds(b) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("VesselParams: dimensions must be positive");
  if (!(b.r_min > 0.0) || !(b.r_max >= b.r_min)) throw std::invalid_argument("VesselParams: invalid radius bounds");
  if (!(b.theta_margin > 0.0) || !(b.theta_margin < std::numbers::pi / 2.0)) {
    throw std::invalid_argument("VesselParams: invalid half-angle margin");
  }
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  radius.assign(n, b.r_min);
  angle.assign(n, 0.0);
  theta1.assign(n, 0.0);
  theta2.assign(n, 0.0);
}

void VesselParams::project(std::size_t i) {
  radius[i] = std::clamp(radius[i], bounds.r_min, bounds.r_max);
  angle[i] = wrap_angle(angle[i]);
  theta1[i] = std::clamp(theta1[i], bounds.theta1_min(), bounds.theta1_max());
  theta2[i] = std::clamp(theta2[i], bounds.theta2_min(), bounds.theta2_max());
}

void VesselParams::project_all() {
  for (std::size_t i = 0; i < size(); ++i) project(i);
}

bool VesselParams::in_bounds() const {
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(radius[i] >= bounds.r_min && radius[i] <= bounds.r_max)) return false;
    if (!(angle[i] >= -std::numbers::pi && angle[i] < std::numbers::pi)) return false;
    if (!(theta1[i] >= bounds.theta1_min() && theta1[i] <= bounds.theta1_max())) return false;
    if (!(theta2[i] >= bounds.theta2_min() && theta2[i] <= bounds.theta2_max())) return false;
  }
  return true;
}

DirectionField2D VesselParams::directions() const {
  DirectionField2D d(width, height);
  for (std::size_t i = 0; i < size(); ++i) d.set_angle(i, angle[i]);
  return d;
}

ScalarField2D VesselParams::radius_field() const { return ScalarField2D(width, height, radius); }

std::vector<ScalarField2D> VesselParams::channels() const {
  return {ScalarField2D(width, height, radius), ScalarField2D(width, height, angle),
          ScalarField2D(width, height, theta1), ScalarField2D(width, height, theta2)};
}

VesselParams VesselParams::from_channels(const std::vector<ScalarField2D>& channels, ParamBounds bounds) {
  if (channels.size() != 4) throw std::invalid_argument("VesselParams: expected 4 channels");
  VesselParams p(channels[0].width(), channels[0].height(), bounds);
  for (std::size_t c = 1; c < 4; ++c) {
    if (!channels[c].same_shape(channels[0])) throw std::invalid_argument("VesselParams: channel shape mismatch");
  }
  auto copy = [](const ScalarField2D& f) { return std::vector<double>(f.values().begin(), f.values().end()); };
  p.radius = copy(channels[0]);
  p.angle = copy(channels[1]);
  p.theta1 = copy(channels[2]);
  p.theta2 = copy(channels[3]);
  p.project_all();
  return p;
}

bool VesselParams::operator==(const VesselParams& o) const {
  return width == o.width && height == o.height && radius == o.radius && angle == o.angle &&
         theta1 == o.theta1 && theta2 == o.theta2;
}

}  // namespace tubeflow
