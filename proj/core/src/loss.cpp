#include "tubeflow/loss.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sampling.hpp"
#include "tubeflow/match.hpp"
#include "tubeflow/parallel.hpp"

namespace tubeflow {

void LossConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !(lambda3 >= 0.0)) {
    throw std::invalid_argument("LossConfig: lambdas must be non-negative");
  }
  if (path_steps < 2) throw std::invalid_argument("LossConfig: path_steps must be >= 2");
  if (track_steps < 1) throw std::invalid_argument("LossConfig: track_steps must be positive");
}

std::string to_json(const LossReport& r) {
  nlohmann::ordered_json j;
  j["l_m"] = r.l_m;
  j["l_f"] = r.l_f;
  j["l_b"] = r.l_b;
  j["l_r"] = r.l_r;
  j["total"] = r.total;
  j["lambdas"] = {r.lambda1, r.lambda2, r.lambda3};
  j["path_steps"] = r.path_steps;
  return j.dump();
}

namespace {

// Path average of the flow agreement <u(p), u(nearest(q))> (or its absolute
// value) with pixel i's angle taken as `phi`.
template <bool Absolute>
double flow_average(const VesselParams& params, std::size_t i, double phi, double length, int steps) {
  const int x = static_cast<int>(i % static_cast<std::size_t>(params.width));
  const int y = static_cast<int>(i / static_cast<std::size_t>(params.width));
  const auto g = [&](double qx, double qy) {
    const std::size_t q = detail::nearest_index(params.width, params.height, qx, qy);
    if (q == i) return 1.0;
    const double c = std::cos(phi - params.angle[q]);
    return Absolute ? std::abs(c) : c;
  };
  return path_integrate(g, {static_cast<double>(x), static_cast<double>(y)}, phi, length, steps) / length;
}

void require_same_shape(const ScalarField2D& image, const VesselParams& params, const char* what) {
  if (image.width() != params.width || image.height() != params.height) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

LossEvaluator::LossEvaluator(const ScalarField2D& image, const TubeTemplate& t, LossConfig cfg)
    : image_(&image), template_(&t), cfg_(cfg), image_grad_(gradient(image)) {
  cfg_.validate();
  v_grad_ = {ScalarField2D(image.width(), image.height()), ScalarField2D(image.width(), image.height())};
}

void LossEvaluator::set_frozen_vesselness(const ScalarField2D& v) {
  if (!v.same_shape(*image_)) throw std::invalid_argument("frozen vesselness: dimension mismatch");
  v_grad_ = gradient(v);
}

double LossEvaluator::profile(Vec2 p, double radius, double angle, std::span<double> scratch) const {
  sample_patch(*image_, p, radius, angle, *template_, scratch);
  return pcc(scratch, template_->full());
}

double LossEvaluator::branch_profile(Vec2 p, double radius, double angle, std::span<double> scratch) const {
  sample_patch(*image_, p, radius, angle, *template_, scratch);
  return pcc(scratch, cfg_.forward_branches ? template_->forward() : template_->full());
}

double LossEvaluator::flow(const VesselParams& params, std::size_t i) const {
  return flow_at(params, i, params.radius[i], params.angle[i]);
}

double LossEvaluator::flow_at(const VesselParams& params, std::size_t i, double radius, double angle) const {
  return flow_average<false>(params, i, angle, 2.0 * radius, cfg_.path_steps);
}

double LossEvaluator::regularizer(const VesselParams& params, std::size_t i) const {
  const Vec2 p{static_cast<double>(i % static_cast<std::size_t>(params.width)),
               static_cast<double>(i / static_cast<std::size_t>(params.width))};
  return regularizer_at(p, params.radius[i], params.angle[i]);
}

double LossEvaluator::regularizer_at(Vec2 p, double radius, double phi) const {
  const Vec2 u = unit_vector(phi);
  const double length = 2.0 * radius;
  const auto g = [&](double qx, double qy) {
    const double di = u.x * detail::bilinear(image_grad_.dx, qx, qy) + u.y * detail::bilinear(image_grad_.dy, qx, qy);
    const double dv = u.x * detail::bilinear(v_grad_.dx, qx, qy) + u.y * detail::bilinear(v_grad_.dy, qx, qy);
    return std::abs(di) + std::abs(dv);
  };
  return path_integrate(g, p, phi, length, cfg_.path_steps) / length;
}

double LossEvaluator::pixel_objective(const VesselParams& params, std::size_t i,
                                      std::span<double> scratch) const {
  const Vec2 p{static_cast<double>(i % static_cast<std::size_t>(params.width)),
               static_cast<double>(i / static_cast<std::size_t>(params.width))};
  const double r = params.radius[i];
  double value = -profile(p, r, params.angle[i], scratch);
  if (cfg_.lambda1 != 0.0) value -= cfg_.lambda1 * flow(params, i);
  if (cfg_.lambda2 != 0.0) {
    value -= cfg_.lambda2 * (branch_profile(p, r, params.branch_angle1(i), scratch) +
                             branch_profile(p, r, params.branch_angle2(i), scratch));
  }
  if (cfg_.lambda3 != 0.0) value += cfg_.lambda3 * regularizer(params, i);
  return value;
}

LossReport LossEvaluator::evaluate(const VesselParams& params) const {
  require_same_shape(*image_, params, "loss");
  struct RowSums {
    double m = 0.0, f = 0.0, b = 0.0, r = 0.0;
  };
  std::vector<RowSums> rows(static_cast<std::size_t>(params.height));
  parallel_rows(params.height, [&](int y) {
    std::vector<double> scratch(template_->sample_count());
    RowSums s;
    for (int x = 0; x < params.width; ++x) {
      const std::size_t i = params.index(x, y);
      const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
      const double r = params.radius[i];
      s.m -= profile(p, r, params.angle[i], scratch);
      s.f -= flow(params, i);
      s.b -= branch_profile(p, r, params.branch_angle1(i), scratch) +
             branch_profile(p, r, params.branch_angle2(i), scratch);
      s.r += regularizer(params, i);
    }
    rows[static_cast<std::size_t>(y)] = s;
  });

  RowSums total;
  for (const auto& s : rows) {
    total.m += s.m;
    total.f += s.f;
    total.b += s.b;
    total.r += s.r;
  }
  const double n = static_cast<double>(params.size());
  LossReport rep;
  rep.l_m = total.m / n;
  rep.l_f = total.f / n;
  rep.l_b = total.b / n;
  rep.l_r = total.r / n;
  rep.lambda1 = cfg_.lambda1;
  rep.lambda2 = cfg_.lambda2;
  rep.lambda3 = cfg_.lambda3;
  rep.path_steps = cfg_.path_steps;
  rep.total = rep.l_m + cfg_.lambda1 * rep.l_f + cfg_.lambda2 * rep.l_b + cfg_.lambda3 * rep.l_r;
  return rep;
}

double loss_profile(const ScalarField2D& image, const VesselParams& params, const TubeTemplate& t) {
  require_same_shape(image, params, "loss_profile");
  std::vector<double> scratch(t.sample_count());
  double sum = 0.0;
  for (int y = 0; y < params.height; ++y) {
    for (int x = 0; x < params.width; ++x) {
      const std::size_t i = params.index(x, y);
      sample_patch(image, {static_cast<double>(x), static_cast<double>(y)}, params.radius[i], params.angle[i], t,
                   scratch);
      sum += pcc(scratch, t.full());
    }
  }
  return -sum / static_cast<double>(params.size());
}

double loss_flow(const VesselParams& params, const LossConfig& cfg) {
  cfg.validate();
  double sum = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    sum += flow_average<false>(params, i, params.angle[i], 2.0 * params.radius[i], cfg.path_steps);
  }
  return -sum / static_cast<double>(params.size());
}

double loss_bifurcation(const ScalarField2D& image, const VesselParams& params, const TubeTemplate& t,
                        const LossConfig& cfg) {
  require_same_shape(image, params, "loss_bifurcation");
  const SampleSet& set = cfg.forward_branches ? t.forward() : t.full();
  std::vector<double> scratch(t.sample_count());
  double sum = 0.0;
  for (int y = 0; y < params.height; ++y) {
    for (int x = 0; x < params.width; ++x) {
      const std::size_t i = params.index(x, y);
      const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
      sample_patch(image, p, params.radius[i], params.branch_angle1(i), t, scratch);
      sum += pcc(scratch, set);
      sample_patch(image, p, params.radius[i], params.branch_angle2(i), t, scratch);
      sum += pcc(scratch, set);
    }
  }
  return -sum / static_cast<double>(params.size());
}

double loss_regularizer(const ScalarField2D& image, const ScalarField2D& v_frozen,
                        const VesselParams& params, const LossConfig& cfg) {
  require_same_shape(image, params, "loss_regularizer");
  if (!v_frozen.same_shape(image)) throw std::invalid_argument("loss_regularizer: dimension mismatch");
  // The profile template is irrelevant here; any valid one will do.
  static const TubeTemplate unused = make_template();
  LossEvaluator ev(image, unused, cfg);
  ev.set_frozen_vesselness(v_frozen);
  double sum = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) sum += ev.regularizer(params, i);
  return sum / static_cast<double>(params.size());
}

LossReport loss_total(const ScalarField2D& image, const ScalarField2D& v_frozen, const VesselParams& params,
                      const TubeTemplate& t, const LossConfig& cfg) {
  require_same_shape(image, params, "loss_total");
  LossEvaluator ev(image, t, cfg);
  ev.set_frozen_vesselness(v_frozen);
  return ev.evaluate(params);
}

double tracking_score(const VesselParams& params, const LossConfig& cfg, int x, int y) {
  const std::size_t i = params.index(x, y);
  return flow_average<true>(params, i, params.angle[i], 4.0 * params.radius[i], cfg.track_steps);
}

ScalarField2D tracking_map(const VesselParams& params, const LossConfig& cfg) {
  ScalarField2D out(params.width, params.height);
  parallel_rows(params.height, [&](int y) {
    for (int x = 0; x < params.width; ++x) out(x, y) = tracking_score(params, cfg, x, y);
  });
  return out;
}

ScalarField2D augmented_vesselness(const ScalarField2D& v, const VesselParams& params, const LossConfig& cfg) {
  if (v.width() != params.width || v.height() != params.height) {
    throw std::invalid_argument("augmented_vesselness: dimension mismatch");
  }
  ScalarField2D track = tracking_map(params, cfg);
  for (std::size_t i = 0; i < v.size(); ++i) track[i] = v[i] * std::min(1.0, track[i]);
  return track;
}

}  // namespace tubeflow
