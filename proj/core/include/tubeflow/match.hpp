#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tubeflow/field.hpp"
#include "tubeflow/params.hpp"
#include "tubeflow/template.hpp"

namespace tubeflow {

/// Image resampled into normalized profile coordinates around a pixel.
/// values[j * k + i] = I(center + r * q_x(i) * u_perp + r * q_y(j) * u) with
/// u = (cos angle, sin angle) and u_perp = (-sin angle, cos angle).
struct Patch {
  int grid_size = 0;
  std::vector<double> values;
  Vec2 center;
  double radius = 0.0;
  double angle = 0.0;
};

/// Throws std::invalid_argument if radius <= 0.
Patch extract_patch(const ScalarField2D& image, Vec2 center, double radius, double angle,
                    const TubeTemplate& t);

/// Allocation-free variant; `out` must hold t.sample_count() values.
void sample_patch(const ScalarField2D& image, Vec2 center, double radius, double angle,
                  const TubeTemplate& t, std::span<double> out);

/// Pearson correlation of patch samples against a template sample set.
/// Returns 0 if either side has variance below 1e-12.
double pcc(std::span<const double> patch, const SampleSet& set);

/// Mean-removed dot product divided by the sample count and by the template
/// standard deviation over the set. Linear in patch contrast; 0 under the
/// same variance floor as pcc.
double cc(std::span<const double> patch, const SampleSet& set);

double pcc(const Patch& patch, const TubeTemplate& t, std::optional<int> slice = std::nullopt);
double cc(const Patch& patch, const TubeTemplate& t, std::optional<int> slice = std::nullopt);

/// cc of the patch at pixel (x, y) under its own (r, phi), clamped below at 0.
double vesselness(const ScalarField2D& image, const VesselParams& params, const TubeTemplate& t,
                  int x, int y);

/// Minimum over the template's slice masks of the slice-restricted cc,
/// clamped below at 0. Throws std::invalid_argument if t has no slices.
double robust_vesselness(const ScalarField2D& image, const VesselParams& params,
                         const TubeTemplate& t, int x, int y);

struct VesselnessOptions {
  /// Minimum over slices instead of the full-template cc.
  bool robust = false;
  /// Average of the flow-direction score and the better of the two branch
  /// scores (branches scored on the forward half-template).
  bool bifurcation = false;
};

/// Score along an explicit direction (full template or min over slices),
/// not clamped. With `forward` only the template half ahead along `angle`
/// is used, as for branch directions.
double directional_score(const ScalarField2D& image, Vec2 center, double radius, double angle,
                         const TubeTemplate& t, bool robust, std::span<double> scratch,
                         bool forward = false);

ScalarField2D vesselness_map(const ScalarField2D& image, const VesselParams& params,
                             const TubeTemplate& t, VesselnessOptions options = {});

}  // namespace tubeflow
