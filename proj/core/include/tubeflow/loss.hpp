#pragma once

#include <span>
#include <string>
#include <vector>

#include "tubeflow/field.hpp"
#include "tubeflow/params.hpp"
#include "tubeflow/template.hpp"

namespace tubeflow {

struct LossConfig {
  double lambda1 = 1.0;  // flow continuity
  double lambda2 = 1.0;  // bifurcation
  double lambda3 = 1.0;  // intensity / vesselness regularizer
  int path_steps = 8;    // trapezoid intervals over the 2r training ray
  int track_steps = 16;  // trapezoid intervals over the 4r tracking ray
  /// Branch profiles use only the template half ahead of the pixel along
  /// b_i. When false they use the full, symmetric template like L_m.
  bool forward_branches = true;

  /// Throws std::invalid_argument on negative weights or path_steps < 2.
  void validate() const;
};

struct LossReport {
  double l_m = 0.0;
  double l_f = 0.0;
  double l_b = 0.0;
  double l_r = 0.0;
  double total = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  int path_steps = 0;
};

/// {"l_m":..,"l_f":..,"l_b":..,"l_r":..,"total":..,"lambdas":[..],"path_steps":n}
std::string to_json(const LossReport& report);

/// Trapezoid rule for g along the straight ray p + t * (cos angle, sin angle),
/// t in [0, length], with `intervals` equal intervals.
template <class Integrand>
double path_integrate(Integrand&& g, Vec2 p, double angle, double length, int intervals) {
  const Vec2 u = unit_vector(angle);
  const double dt = length / intervals;
  double sum = 0.5 * (g(p.x, p.y) + g(p.x + length * u.x, p.y + length * u.y));
  for (int k = 1; k < intervals; ++k) {
    const double t = k * dt;
    sum += g(p.x + t * u.x, p.y + t * u.y);
  }
  return sum * dt;
}

/// Evaluates the training losses for one image. Holds the image gradient and
/// a frozen vesselness snapshot (and its gradient) for the regularizer.
class LossEvaluator {
 public:
  LossEvaluator(const ScalarField2D& image, const TubeTemplate& t, LossConfig cfg);

  /// Replace the frozen vesselness field used by the regularizer.
  void set_frozen_vesselness(const ScalarField2D& v);

  const ScalarField2D& image() const { return *image_; }
  const TubeTemplate& tube_template() const { return *template_; }
  const LossConfig& config() const { return cfg_; }

  // Per-pixel pieces. `scratch` must hold template().sample_count() values.

  /// PCC of the profile at p along `angle` (the L_m / L_b integrand).
  double profile(Vec2 p, double radius, double angle, std::span<double> scratch) const;
  /// PCC of the branch profile along `angle` (the L_b integrand).
  double branch_profile(Vec2 p, double radius, double angle, std::span<double> scratch) const;
  /// Path-averaged cosine <u(p), u(.)> over the 2r ray, in [-1, 1].
  double flow(const VesselParams& params, std::size_t i) const;
  /// Same, with pixel i's radius and angle replaced (the ray sees the
  /// replaced angle wherever it lands on pixel i).
  double flow_at(const VesselParams& params, std::size_t i, double radius, double angle) const;
  /// Path-averaged |u^T grad I| + |u^T grad V| over the 2r ray.
  double regularizer(const VesselParams& params, std::size_t i) const;
  double regularizer_at(Vec2 p, double radius, double angle) const;

  /// Pixel's own contribution to |Omega| * total loss.
  double pixel_objective(const VesselParams& params, std::size_t i, std::span<double> scratch) const;

  LossReport evaluate(const VesselParams& params) const;

 private:
  const ScalarField2D* image_;
  const TubeTemplate* template_;
  LossConfig cfg_;
  Gradient image_grad_;
  Gradient v_grad_;
};

/// -(1/|Omega|) sum_p pcc(profile along u).
double loss_profile(const ScalarField2D& image, const VesselParams& params, const TubeTemplate& t);
/// -(1/|Omega|) sum_p path-averaged <u(p), u(q)> over the ray of length 2r(p).
double loss_flow(const VesselParams& params, const LossConfig& cfg);
/// Profile loss along b1 plus profile loss along b2.
double loss_bifurcation(const ScalarField2D& image, const VesselParams& params, const TubeTemplate& t,
                        const LossConfig& cfg = {});
/// Path-averaged |u^T grad I| + |u^T grad V_frozen|, averaged over pixels.
double loss_regularizer(const ScalarField2D& image, const ScalarField2D& v_frozen,
                        const VesselParams& params, const LossConfig& cfg);
LossReport loss_total(const ScalarField2D& image, const ScalarField2D& v_frozen,
                      const VesselParams& params, const TubeTemplate& t, const LossConfig& cfg);

/// Path average of |<u(p), u(.)>| over a ray of length 4r(p), in [0, 1].
double tracking_score(const VesselParams& params, const LossConfig& cfg, int x, int y);
ScalarField2D tracking_map(const VesselParams& params, const LossConfig& cfg);
/// U = V * V_t, pointwise.
ScalarField2D augmented_vesselness(const ScalarField2D& v, const VesselParams& params,
                                   const LossConfig& cfg);

}  // namespace tubeflow
