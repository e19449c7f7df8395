#pragma once

#include <functional>
#include <vector>

#include "tubeflow/field.hpp"
#include "tubeflow/loss.hpp"
#include "tubeflow/params.hpp"
#include "tubeflow/template.hpp"

namespace tubeflow {

struct OptimConfig {
  std::vector<double> radii_grid;  // matched-filter radii (ascending)
  std::vector<double> angle_grid;  // matched-filter angles in [0, pi)
  /// Half-angle magnitudes tried at init for each branch (radians). Empty
  /// means both half-angles start at 0.
  std::vector<double> theta_grid;
  int iters = 200;
  double step_r = 2.0;
  double step_angle = 0.5;
  double fd_h_r = 1e-3;
  double fd_h_angle = 1e-3;
  int max_halvings = 10;
  /// Keep theta1 = theta2 = 0 (bifurcation ablation).
  bool freeze_theta = false;

  /// 8 log-spaced radii over [r_min, r_max] and 12 angles k * pi / 12.
  static OptimConfig defaults(const ParamBounds& bounds);
  /// 10, 20, ..., 80 degrees.
  static std::vector<double> default_theta_grid();
  static std::vector<double> log_spaced(double lo, double hi, int count);
  static std::vector<double> uniform_angles(int count);

  void validate() const;
};

/// Matched-filter initialization: per pixel, (r, phi) is the argmax of the
/// profile PCC over radii_grid x angle_grid. Ties go to the smaller radius,
/// then the smaller angle. Half-angles start at 0, or, with a theta_grid,
/// at the argmax of the forward-half branch PCC over {0} and the grid
/// (theta1 >= 0, theta2 <= 0, ties to the smaller magnitude).
VesselParams init_matched_filter(const ScalarField2D& image, const TubeTemplate& t, const OptimConfig& cfg,
                                 ParamBounds bounds);

struct PixelParams {
  double radius = 0.0;
  double angle = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
};

struct ParamGradient {
  double radius = 0.0;
  double angle = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
};

enum class Component { radius, angle, theta1, theta2 };

/// Central differences of `partial(component, state)` around `at`. Radius
/// and half-angle perturbations are projected into bounds first and the
/// difference is divided by the projected span, so at an active bound the
/// estimate degrades to a one-sided difference. `partial` may omit any term
/// that does not depend on the perturbed component.
ParamGradient fd_gradient_partial(const std::function<double(Component, const PixelParams&)>& partial,
                                  const PixelParams& at, const ParamBounds& bounds, const OptimConfig& cfg,
                                  bool with_theta = true);

using FieldObjective = std::function<double(const VesselParams&)>;

/// Central finite-difference gradient of `loss` with respect to the four
/// parameters of pixel `pixel`. `params` is perturbed in place and restored
/// bit-exactly before returning.
ParamGradient fd_gradient(const FieldObjective& loss, VesselParams& params, std::size_t pixel,
                          const OptimConfig& cfg);

struct DescentResult {
  VesselParams params;
  std::vector<double> totals;  // objective after each iteration
};

/// Projected finite-difference descent on an arbitrary field objective with
/// backtracking step halving. Every pixel is updated from the same snapshot.
/// Intended for small problems: each iteration costs 8 objective
/// evaluations per pixel.
DescentResult descend(const FieldObjective& loss, VesselParams params, const OptimConfig& cfg);

struct RefineResult {
  VesselParams params;
  /// Loss after each iteration's accepted step (frozen V of that iteration).
  std::vector<LossReport> history;
  /// Loss at the start of each iteration, under the same frozen V.
  std::vector<double> start_totals;
  /// Step halvings used per iteration; max_halvings + 1 means rejected.
  std::vector<int> halvings;
};

/// Alternating refinement: each iteration freezes V = vesselness(params) and
/// takes a finite-difference gradient per pixel. Each pixel halves its own
/// step until its local objective (own terms plus the flow terms of rays
/// landing on it) decreases. The combined update is then halved until the
/// total loss does not increase; if no halving works the parameters are left
/// unchanged.
RefineResult refine(const ScalarField2D& image, const VesselParams& params0, const TubeTemplate& t,
                    const LossConfig& loss_cfg, const OptimConfig& cfg);

}  // namespace tubeflow
