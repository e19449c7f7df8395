#include "tubeflow/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "sampling.hpp"
#include "tubeflow/match.hpp"
#include "tubeflow/parallel.hpp"

namespace tubeflow {

std::vector<double> OptimConfig::log_spaced(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_spaced: invalid range");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double ratio = std::log(hi / lo);
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = lo * std::exp(ratio * k / (count - 1));
  out.back() = hi;
  return out;
}

std::vector<double> OptimConfig::uniform_angles(int count) {
  if (count < 1) throw std::invalid_argument("uniform_angles: count must be positive");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = std::numbers::pi * k / count;
  return out;
}

std::vector<double> OptimConfig::default_theta_grid() {
  std::vector<double> out;
  for (int d = 10; d <= 80; d += 10) out.push_back(d * std::numbers::pi / 180.0);
  return out;
}

OptimConfig OptimConfig::defaults(const ParamBounds& bounds) {
  OptimConfig cfg;
  cfg.radii_grid = log_spaced(bounds.r_min, bounds.r_max, 8);
  cfg.angle_grid = uniform_angles(12);
  return cfg;
}

void OptimConfig::validate() const {
  if (radii_grid.empty() || angle_grid.empty()) throw std::invalid_argument("OptimConfig: empty search grid");
  if (std::any_of(radii_grid.begin(), radii_grid.end(), [](double r) { return !(r > 0.0); })) {
    throw std::invalid_argument("OptimConfig: radii must be positive");
  }
  if (std::any_of(theta_grid.begin(), theta_grid.end(), [](double t) { return !(t > 0.0); })) {
    throw std::invalid_argument("OptimConfig: theta grid values must be positive");
  }
  if (iters < 0) throw std::invalid_argument("OptimConfig: iters must be non-negative");
  if (!(step_r > 0.0) || !(step_angle > 0.0)) throw std::invalid_argument("OptimConfig: steps must be positive");
  if (!(fd_h_r > 0.0) || !(fd_h_angle > 0.0)) {
    throw std::invalid_argument("OptimConfig: finite-difference steps must be positive");
  }
  if (max_halvings < 0) throw std::invalid_argument("OptimConfig: max_halvings must be non-negative");
}

VesselParams init_matched_filter(const ScalarField2D& image, const TubeTemplate& t, const OptimConfig& cfg,
                                 ParamBounds bounds) {
  cfg.validate();
  std::vector<double> radii = cfg.radii_grid;
  std::vector<double> angles = cfg.angle_grid;
  std::sort(radii.begin(), radii.end());
  std::sort(angles.begin(), angles.end());
  std::vector<double> thetas = cfg.theta_grid;
  std::sort(thetas.begin(), thetas.end());

  VesselParams params(image.width(), image.height(), bounds);
  parallel_rows(image.height(), [&](int y) {
    std::vector<double> scratch(t.sample_count());
    for (int x = 0; x < image.width(); ++x) {
      double best = -std::numeric_limits<double>::infinity();
      double best_r = radii.front();
      double best_a = angles.front();
      for (double r : radii) {
        for (double a : angles) {
          sample_patch(image, {static_cast<double>(x), static_cast<double>(y)}, r, a, t, scratch);
          const double v = pcc(scratch, t.full());
          if (v > best) {
            best = v;
            best_r = r;
            best_a = a;
          }
        }
      }
      const std::size_t i = params.index(x, y);
      params.radius[i] = best_r;
      params.angle[i] = best_a;
      if (!thetas.empty()) {
        const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
        const auto branch = [&](double theta) {
          sample_patch(image, p, best_r, best_a + std::numbers::pi + theta, t, scratch);
          return pcc(scratch, t.forward());
        };
        const double at_zero = branch(0.0);
        double best1 = at_zero, best2 = at_zero;
        for (double th : thetas) {
          const double v1 = branch(std::min(th, bounds.theta1_max()));
          if (v1 > best1) {
            best1 = v1;
            params.theta1[i] = std::min(th, bounds.theta1_max());
          }
          const double v2 = branch(std::max(-th, bounds.theta2_min()));
          if (v2 > best2) {
            best2 = v2;
            params.theta2[i] = std::max(-th, bounds.theta2_min());
          }
        }
      }
      params.project(i);
    }
  });
  return params;
}

namespace {

// Projected central difference for one component.
double central_difference(const std::function<double(Component, const PixelParams&)>& partial, Component c,
                          const PixelParams& at, double h, double lo, double hi, double PixelParams::*member,
                          bool project) {
  PixelParams plus = at;
  PixelParams minus = at;
  plus.*member = at.*member + h;
  minus.*member = at.*member - h;
  if (project) {
    plus.*member = std::clamp(plus.*member, lo, hi);
    minus.*member = std::clamp(minus.*member, lo, hi);
  }
  const double span = plus.*member - minus.*member;
  if (!(span > 0.0)) return 0.0;
  return (partial(c, plus) - partial(c, minus)) / span;
}

}  // namespace

ParamGradient fd_gradient_partial(const std::function<double(Component, const PixelParams&)>& partial,
                                  const PixelParams& at, const ParamBounds& bounds, const OptimConfig& cfg,
                                  bool with_theta) {
  ParamGradient g;
  g.radius = central_difference(partial, Component::radius, at, cfg.fd_h_r, bounds.r_min, bounds.r_max,
                                &PixelParams::radius, true);
  g.angle = central_difference(partial, Component::angle, at, cfg.fd_h_angle, 0.0, 0.0, &PixelParams::angle, false);
  if (with_theta) {
    g.theta1 = central_difference(partial, Component::theta1, at, cfg.fd_h_angle, bounds.theta1_min(),
                                  bounds.theta1_max(), &PixelParams::theta1, true);
    g.theta2 = central_difference(partial, Component::theta2, at, cfg.fd_h_angle, bounds.theta2_min(),
                                  bounds.theta2_max(), &PixelParams::theta2, true);
  }
  return g;
}

ParamGradient fd_gradient(const FieldObjective& loss, VesselParams& params, std::size_t pixel,
                          const OptimConfig& cfg) {
  const PixelParams saved{params.radius[pixel], params.angle[pixel], params.theta1[pixel], params.theta2[pixel]};
  const auto partial = [&](Component, const PixelParams& s) {
    params.radius[pixel] = s.radius;
    params.angle[pixel] = s.angle;
    params.theta1[pixel] = s.theta1;
    params.theta2[pixel] = s.theta2;
    return loss(params);
  };
  ParamGradient g = fd_gradient_partial(partial, saved, params.bounds, cfg, !cfg.freeze_theta);
  params.radius[pixel] = saved.radius;
  params.angle[pixel] = saved.angle;
  params.theta1[pixel] = saved.theta1;
  params.theta2[pixel] = saved.theta2;
  return g;
}

namespace {

VesselParams take_step(const VesselParams& base, const std::vector<ParamGradient>& grad, const OptimConfig& cfg,
                       double alpha) {
  VesselParams next = base;
  for (std::size_t i = 0; i < next.size(); ++i) {
    next.radius[i] -= alpha * cfg.step_r * grad[i].radius;
    next.angle[i] -= alpha * cfg.step_angle * grad[i].angle;
    if (!cfg.freeze_theta) {
      next.theta1[i] -= alpha * cfg.step_angle * grad[i].theta1;
      next.theta2[i] -= alpha * cfg.step_angle * grad[i].theta2;
    }
    next.project(i);
  }
  return next;
}

}  // namespace

DescentResult descend(const FieldObjective& loss, VesselParams params, const OptimConfig& cfg) {
  cfg.validate();
  params.project_all();
  DescentResult result;
  double current = loss(params);
  std::vector<ParamGradient> grad(params.size());
  for (int it = 0; it < cfg.iters; ++it) {
    VesselParams scratch = params;
    for (std::size_t i = 0; i < params.size(); ++i) grad[i] = fd_gradient(loss, scratch, i, cfg);
    double alpha = 1.0;
    for (int h = 0; h <= cfg.max_halvings; ++h, alpha *= 0.5) {
      VesselParams trial = take_step(params, grad, cfg, alpha);
      const double value = loss(trial);
      if (value <= current) {
        params = std::move(trial);
        current = value;
        break;
      }
    }
    result.totals.push_back(current);
  }
  result.params = std::move(params);
  return result;
}

namespace {

// For every pixel i, the rays of other pixels q that land on i, with the
// trapezoid weight (divided by ray length) of those samples. The flow loss
// of q contains -coef * cos(phi_q - phi_i) for each entry.
struct ReverseRays {
  std::vector<std::size_t> offset;
  std::vector<std::size_t> source;
  std::vector<double> coef;
};

ReverseRays build_reverse_rays(const VesselParams& params, int steps) {
  struct Hit {
    std::size_t target, source;
    double coef;
  };
  std::vector<Hit> hits;
  hits.reserve(params.size() * static_cast<std::size_t>(steps));
  for (std::size_t q = 0; q < params.size(); ++q) {
    const double px = static_cast<double>(q % static_cast<std::size_t>(params.width));
    const double py = static_cast<double>(q / static_cast<std::size_t>(params.width));
    const Vec2 u = unit_vector(params.angle[q]);
    const double length = 2.0 * params.radius[q];
    const double dt = length / steps;
    for (int k = 1; k <= steps; ++k) {
      const double t = k * dt;
      const std::size_t target = detail::nearest_index(params.width, params.height, px + t * u.x, py + t * u.y);
      if (target == q) continue;
      const double w = (k == steps ? 0.5 : 1.0) * dt / length;
      hits.push_back({target, q, w});
    }
  }
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.target < b.target; });
  ReverseRays rays;
  rays.offset.assign(params.size() + 1, 0);
  rays.source.reserve(hits.size());
  rays.coef.reserve(hits.size());
  for (const Hit& h : hits) {
    ++rays.offset[h.target + 1];
    rays.source.push_back(h.source);
    rays.coef.push_back(h.coef);
  }
  for (std::size_t i = 0; i < params.size(); ++i) rays.offset[i + 1] += rays.offset[i];
  return rays;
}

}  // namespace

RefineResult refine(const ScalarField2D& image, const VesselParams& params0, const TubeTemplate& t,
                    const LossConfig& loss_cfg, const OptimConfig& cfg) {
  cfg.validate();
  loss_cfg.validate();
  if (image.width() != params0.width || image.height() != params0.height) {
    throw std::invalid_argument("refine: image and parameter dimensions differ");
  }

  RefineResult result;
  result.params = params0;
  if (cfg.iters == 0) return result;

  VesselParams& params = result.params;
  params.project_all();
  LossEvaluator ev(image, t, loss_cfg);
  const double l1 = loss_cfg.lambda1;
  const double l2 = loss_cfg.lambda2;
  const double l3 = loss_cfg.lambda3;
  const bool with_theta = !cfg.freeze_theta && l2 != 0.0;
  std::vector<ParamGradient> delta(params.size());

  for (int it = 0; it < cfg.iters; ++it) {
    ev.set_frozen_vesselness(vesselness_map(image, params, t));
    const LossReport start = ev.evaluate(params);
    const ReverseRays rays = l1 != 0.0 ? build_reverse_rays(params, loss_cfg.path_steps) : ReverseRays{};

    parallel_rows(params.height, [&](int y) {
      std::vector<double> scratch(t.sample_count());
      for (int x = 0; x < params.width; ++x) {
        const std::size_t i = params.index(x, y);
        const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
        const auto own = [&](const PixelParams& s) {
          double v = -ev.profile(p, s.radius, s.angle, scratch);
          if (l2 != 0.0) {
            const double back = s.angle + std::numbers::pi;
            v -= l2 * (ev.branch_profile(p, s.radius, back + s.theta1, scratch) +
                       ev.branch_profile(p, s.radius, back + s.theta2, scratch));
          }
          if (l1 != 0.0) v -= l1 * ev.flow_at(params, i, s.radius, s.angle);
          if (l3 != 0.0) v += l3 * ev.regularizer_at(p, s.radius, s.angle);
          return v;
        };
        const auto partial = [&](Component c, const PixelParams& s) {
          switch (c) {
            case Component::radius:
              return own(s);
            case Component::angle: {
              double v = own(s);
              if (l1 != 0.0) {
                for (std::size_t e = rays.offset[i]; e < rays.offset[i + 1]; ++e) {
                  v -= l1 * rays.coef[e] * std::cos(params.angle[rays.source[e]] - s.angle);
                }
              }
              return v;
            }
            case Component::theta1:
              return -l2 * ev.branch_profile(p, s.radius, s.angle + std::numbers::pi + s.theta1, scratch);
            case Component::theta2:
              return -l2 * ev.branch_profile(p, s.radius, s.angle + std::numbers::pi + s.theta2, scratch);
          }
          return 0.0;
        };
        const PixelParams at{params.radius[i], params.angle[i], params.theta1[i], params.theta2[i]};
        const ParamGradient g = fd_gradient_partial(partial, at, params.bounds, cfg, with_theta);

        // Per-pixel backtracking on the pixel's local objective.
        const auto local = [&](const PixelParams& s) { return partial(Component::angle, s); };
        const double f0 = local(at);
        PixelParams best = at;
        double alpha = 1.0;
        for (int h = 0; h <= cfg.max_halvings; ++h, alpha *= 0.5) {
          PixelParams s = at;
          s.radius = std::clamp(at.radius - alpha * cfg.step_r * g.radius, params.bounds.r_min, params.bounds.r_max);
          s.angle = at.angle - alpha * cfg.step_angle * g.angle;
          if (with_theta) {
            const ParamBounds& b = params.bounds;
            s.theta1 = std::clamp(at.theta1 - alpha * cfg.step_angle * g.theta1, b.theta1_min(), b.theta1_max());
            s.theta2 = std::clamp(at.theta2 - alpha * cfg.step_angle * g.theta2, b.theta2_min(), b.theta2_max());
          }
          if (local(s) < f0) {
            best = s;
            break;
          }
        }
        delta[i] = {best.radius - at.radius, best.angle - at.angle, best.theta1 - at.theta1,
                    best.theta2 - at.theta2};
      }
    });

    double alpha = 1.0;
    int halvings = 0;
    LossReport accepted = start;
    for (; halvings <= cfg.max_halvings; ++halvings, alpha *= 0.5) {
      VesselParams trial = params;
      for (std::size_t i = 0; i < trial.size(); ++i) {
        trial.radius[i] += alpha * delta[i].radius;
        trial.angle[i] += alpha * delta[i].angle;
        trial.theta1[i] += alpha * delta[i].theta1;
        trial.theta2[i] += alpha * delta[i].theta2;
        trial.project(i);
      }
      const LossReport rep = ev.evaluate(trial);
      if (rep.total <= start.total) {
        params = std::move(trial);
        accepted = rep;
        break;
      }
    }
    result.start_totals.push_back(start.total);
    result.history.push_back(accepted);
    result.halvings.push_back(halvings);
  }
  return result;
}

}  // namespace tubeflow
