#pragma once

#include <vector>

#include "tubeflow/field.hpp"
#include "tubeflow/loss.hpp"
#include "tubeflow/optim.hpp"
#include "tubeflow/params.hpp"
#include "tubeflow/template.hpp"

namespace tubeflow {

/// Everything needed to turn one image into vesselness maps.
struct EnhanceConfig {
  ParamBounds bounds;
  LossConfig loss;
  OptimConfig optim;
  /// Score with the minimum over template slices.
  bool robust = false;
  /// Bifurcation fields on. Off means lambda2 = 0, theta frozen at 0 and a
  /// plain flow-direction vesselness.
  bool bifurcation = true;
  /// Multiply by the tracking score.
  bool track = true;

  /// Bounds for the image size, default grids, the half-angle init grid.
  static EnhanceConfig defaults(int width, int height);
  void validate() const;
};

struct EnhanceResult {
  VesselParams params;
  ScalarField2D vesselness;  // V (or V_r)
  ScalarField2D augmented;   // U = V * min(1, V_t), or V with tracking off
  std::vector<LossReport> history;
};

EnhanceResult enhance(const ScalarField2D& image, const TubeTemplate& t, const EnhanceConfig& cfg);

/// Template used by the pipeline: defaults with 2 slices.
const TubeTemplate& default_template();

}  // namespace tubeflow
