#include "tubeflow/match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sampling.hpp"
#include "tubeflow/parallel.hpp"

namespace tubeflow {

namespace {

constexpr double kDegenerateVariance = 1e-12;

struct PatchMoments {
  double dot = 0.0;       // sum P * (T - mean_T)
  double variance = 0.0;  // population variance of P over the set
};

PatchMoments moments(std::span<const double> patch, const SampleSet& set) {
  const std::size_t n = set.index.size();
  double sum = 0.0;
  double dot = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const double v = patch[static_cast<std::size_t>(set.index[s])];
    sum += v;
    dot += v * set.centered[s];
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const double d = patch[static_cast<std::size_t>(set.index[s])] - mean;
    ss += d * d;
  }
  return {dot, ss / static_cast<double>(n)};
}

const SampleSet& select(const TubeTemplate& t, std::optional<int> slice) {
  if (!slice) return t.full();
  if (*slice < 0 || *slice >= t.slice_count()) throw std::out_of_range("slice index out of range");
  return t.slice(*slice);
}

}  // namespace

void sample_patch(const ScalarField2D& image, Vec2 center, double radius, double angle,
                  const TubeTemplate& t, std::span<double> out) {
  const int k = t.grid_size();
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  // u = (c, s), u_perp = (-s, c)
  const double* data = image.values().data();
  const int w = image.width();
  const int h = image.height();
  const double* q = t.coordinates().data();
  for (int j = 0; j < k; ++j) {
    const double qy = radius * q[j];
    const double bx = center.x + qy * c;
    const double by = center.y + qy * s;
    for (int i = 0; i < k; ++i) {
      const double qx = radius * q[i];
      out[static_cast<std::size_t>(j * k + i)] = detail::bilinear(data, w, h, bx - qx * s, by + qx * c);
    }
  }
}

Patch extract_patch(const ScalarField2D& image, Vec2 center, double radius, double angle,
                    const TubeTemplate& t) {
  if (!(radius > 0.0)) throw std::invalid_argument("extract_patch: radius must be positive");
  Patch p;
  p.grid_size = t.grid_size();
  p.values.resize(t.sample_count());
  p.center = center;
  p.radius = radius;
  p.angle = angle;
  sample_patch(image, center, radius, angle, t, p.values);
  return p;
}

double pcc(std::span<const double> patch, const SampleSet& set) {
  const double n = static_cast<double>(set.index.size());
  const double t_var = set.stddev * set.stddev;
  if (t_var < kDegenerateVariance) return 0.0;
  const PatchMoments m = moments(patch, set);
  if (m.variance < kDegenerateVariance) return 0.0;
  const double r = m.dot / (std::sqrt(m.variance * n) * set.norm);
  return std::clamp(r, -1.0, 1.0);
}

double cc(std::span<const double> patch, const SampleSet& set) {
  if (set.stddev * set.stddev < kDegenerateVariance) return 0.0;
  const PatchMoments m = moments(patch, set);
  if (m.variance < kDegenerateVariance) return 0.0;
  return m.dot / (static_cast<double>(set.index.size()) * set.stddev);
}

double pcc(const Patch& patch, const TubeTemplate& t, std::optional<int> slice) {
  return pcc(patch.values, select(t, slice));
}

double cc(const Patch& patch, const TubeTemplate& t, std::optional<int> slice) {
  return cc(patch.values, select(t, slice));
}

double directional_score(const ScalarField2D& image, Vec2 center, double radius, double angle,
                         const TubeTemplate& t, bool robust, std::span<double> scratch, bool forward) {
  sample_patch(image, center, radius, angle, t, scratch);
  if (!robust) return cc(scratch, forward ? t.forward() : t.full());
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < t.slice_count(); ++s) {
    best = std::min(best, cc(scratch, forward ? t.forward_slice(s) : t.slice(s)));
  }
  return best;
}

double vesselness(const ScalarField2D& image, const VesselParams& params, const TubeTemplate& t,
                  int x, int y) {
  const std::size_t i = params.index(x, y);
  std::vector<double> scratch(t.sample_count());
  return std::max(0.0, directional_score(image, {static_cast<double>(x), static_cast<double>(y)},
                                         params.radius[i], params.angle[i], t, false, scratch));
}

double robust_vesselness(const ScalarField2D& image, const VesselParams& params,
                         const TubeTemplate& t, int x, int y) {
  if (t.slice_count() == 0) throw std::invalid_argument("robust_vesselness: template has no slices");
  const std::size_t i = params.index(x, y);
  std::vector<double> scratch(t.sample_count());
  return std::max(0.0, directional_score(image, {static_cast<double>(x), static_cast<double>(y)},
                                         params.radius[i], params.angle[i], t, true, scratch));
}

ScalarField2D vesselness_map(const ScalarField2D& image, const VesselParams& params,
                             const TubeTemplate& t, VesselnessOptions options) {
  if (image.width() != params.width || image.height() != params.height) {
    throw std::invalid_argument("vesselness_map: image and parameter dimensions differ");
  }
  if (options.robust && t.slice_count() == 0) {
    throw std::invalid_argument("vesselness_map: robust scoring needs template slices");
  }
  ScalarField2D out(image.width(), image.height());
  parallel_rows(image.height(), [&](int y) {
    std::vector<double> scratch(t.sample_count());
    for (int x = 0; x < image.width(); ++x) {
      const std::size_t i = params.index(x, y);
      const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
      double v = directional_score(image, p, params.radius[i], params.angle[i], t, options.robust, scratch);
      if (options.bifurcation) {
        const double v1 = directional_score(image, p, params.radius[i], params.branch_angle1(i), t,
                                            options.robust, scratch, true);
        const double v2 = directional_score(image, p, params.radius[i], params.branch_angle2(i), t,
                                            options.robust, scratch, true);
        v = 0.5 * (v + std::max(v1, v2));
      }
      out(x, y) = std::max(0.0, v);
    }
  });
  return out;
}

}  // namespace tubeflow
