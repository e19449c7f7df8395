#include "tubeflow/template.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tubeflow {

namespace {

SampleSet make_sample_set(std::span<const double> values, std::vector<int> index) {
  SampleSet s;
  s.index = std::move(index);
  double mean = 0.0;
  for (int i : s.index) mean += values[static_cast<std::size_t>(i)];
  mean /= static_cast<double>(s.index.size());
  s.centered.reserve(s.index.size());
  double ss = 0.0;
  for (int i : s.index) {
    const double c = values[static_cast<std::size_t>(i)] - mean;
    s.centered.push_back(c);
    ss += c * c;
  }
  s.norm = std::sqrt(ss);
  s.stddev = std::sqrt(ss / static_cast<double>(s.index.size()));
  return s;
}

}  // namespace

double tube_profile(double qx, double ramp_width) {
  const double a = std::abs(qx);
  if (a <= 1.0 - ramp_width) return 1.0;
  if (a >= 1.0 + ramp_width) return 0.0;
  return (1.0 + ramp_width - a) / (2.0 * ramp_width);
}

double TubeTemplate::coordinate(int i) const { return coords_.at(static_cast<std::size_t>(i)); }

bool TubeTemplate::in_slice(int s, int i, int j) const {
  return slice_membership_.at(static_cast<std::size_t>(s))[static_cast<std::size_t>(j * grid_size_ + i)] != 0;
}

TubeTemplate make_template(int grid_size, double extent, double ramp_width) {
  if (grid_size < 5 || grid_size % 2 == 0) {
    throw std::invalid_argument("make_template: grid size must be odd and >= 5");
  }
  if (!(extent > 1.0)) throw std::invalid_argument("make_template: extent must exceed 1");
  if (!(ramp_width > 0.0) || !(ramp_width < extent - 1.0)) {
    throw std::invalid_argument("make_template: ramp width must lie in (0, extent - 1)");
  }

  TubeTemplate t;
  t.grid_size_ = grid_size;
  t.extent_ = extent;
  t.ramp_width_ = ramp_width;
  t.values_.resize(static_cast<std::size_t>(grid_size * grid_size));
  t.coords_.resize(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) {
    t.coords_[static_cast<std::size_t>(i)] =
        -extent + 2.0 * extent * static_cast<double>(i) / static_cast<double>(grid_size - 1);
  }
  std::vector<int> all(t.values_.size());
  for (int j = 0; j < grid_size; ++j) {
    for (int i = 0; i < grid_size; ++i) {
      const int flat = j * grid_size + i;
      t.values_[static_cast<std::size_t>(flat)] = tube_profile(t.coordinate(i), ramp_width);
      all[static_cast<std::size_t>(flat)] = flat;
    }
  }
  t.full_ = make_sample_set(t.values_, std::move(all));
  std::vector<int> ahead;
  for (int flat = (grid_size - 1) / 2 * grid_size; flat < grid_size * grid_size; ++flat) ahead.push_back(flat);
  t.forward_ = make_sample_set(t.values_, std::move(ahead));
  return t;
}

TubeTemplate make_slices(TubeTemplate t, int count) {
  if (count < 2) throw std::invalid_argument("make_slices: need at least 2 slices");
  constexpr double tol = 1e-9;
  const double two_pi = 2.0 * std::numbers::pi;
  const double width = two_pi / count;
  const int k = t.grid_size_;

  t.slices_.clear();
  t.forward_slices_.clear();
  t.slice_membership_.clear();
  for (int s = 0; s < count; ++s) {
    const double start = std::numbers::pi / 2.0 + s * width;
    std::vector<int> index;
    std::vector<char> member(t.values_.size(), 0);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < k; ++i) {
        const double qx = t.coordinate(i);
        const double qy = t.coordinate(j);
        bool inside = false;
        if (qx == 0.0 && qy == 0.0) {
          inside = true;
        } else {
          double delta = std::fmod(std::atan2(qy, qx) - start, two_pi);
          if (delta < 0.0) delta += two_pi;
          inside = delta <= width + tol || delta >= two_pi - tol;
        }
        if (inside) {
          const int flat = j * k + i;
          index.push_back(flat);
          member[static_cast<std::size_t>(flat)] = 1;
        }
      }
    }
    if (static_cast<int>(index.size()) < k) {
      throw std::invalid_argument("make_slices: slice " + std::to_string(s) + " has fewer than " +
                                  std::to_string(k) + " samples");
    }
    std::vector<int> ahead;
    for (int flat : index) {
      if (flat >= (k - 1) / 2 * k) ahead.push_back(flat);
    }
    t.forward_slices_.push_back(make_sample_set(t.values_, std::move(ahead)));
    t.slices_.push_back(make_sample_set(t.values_, std::move(index)));
    t.slice_membership_.push_back(std::move(member));
  }
  return t;
}

}  // namespace tubeflow
