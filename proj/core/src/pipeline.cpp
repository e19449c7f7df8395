#include "tubeflow/pipeline.hpp"

#include <stdexcept>

#include "tubeflow/match.hpp"

namespace tubeflow {

EnhanceConfig EnhanceConfig::defaults(int width, int height) {
  EnhanceConfig cfg;
  cfg.bounds = ParamBounds::for_image(width, height);
  cfg.optim = OptimConfig::defaults(cfg.bounds);
  cfg.optim.theta_grid = OptimConfig::default_theta_grid();
  return cfg;
}

void EnhanceConfig::validate() const {
  if (!(bounds.r_min > 0.0) || !(bounds.r_max >= bounds.r_min)) {
    throw std::invalid_argument("EnhanceConfig: need 0 < r_min <= r_max");
  }
  loss.validate();
  optim.validate();
}

EnhanceResult enhance(const ScalarField2D& image, const TubeTemplate& t, const EnhanceConfig& cfg_in) {
  cfg_in.validate();
  EnhanceConfig cfg = cfg_in;
  if (!cfg.bifurcation) {
    cfg.loss.lambda2 = 0.0;
    cfg.optim.freeze_theta = true;
    cfg.optim.theta_grid.clear();
  }
  if (cfg.robust && t.slice_count() == 0) throw std::invalid_argument("enhance: robust scoring needs slices");

  EnhanceResult out;
  VesselParams init = init_matched_filter(image, t, cfg.optim, cfg.bounds);
  RefineResult refined = refine(image, init, t, cfg.loss, cfg.optim);
  out.params = std::move(refined.params);
  out.history = std::move(refined.history);

  VesselnessOptions vo;
  vo.robust = cfg.robust;
  vo.bifurcation = cfg.bifurcation;
  out.vesselness = vesselness_map(image, out.params, t, vo);
  out.augmented = cfg.track ? augmented_vesselness(out.vesselness, out.params, cfg.loss) : out.vesselness;
  return out;
}

const TubeTemplate& default_template() {
  static const TubeTemplate t = make_slices(make_template());
  return t;
}

}  // namespace tubeflow
