#pragma once

#include <span>
#include <vector>

namespace tubeflow {

/// Template samples selected by a mask, with statistics precomputed so that
/// correlation against a patch is a single pass.
struct SampleSet {
  std::vector<int> index;        // flat grid indices (j * k + i)
  std::vector<double> centered;  // template value minus the set mean
  double norm = 0.0;             // ||T - mean|| over the set
  double stddev = 0.0;           // population standard deviation over the set
};

/// Ramped unit-radius tube profile across the axis: 1 inside |qx| <= 1 - ramp,
/// 0 beyond 1 + ramp, linear in between.
double tube_profile(double qx, double ramp_width);

/// Canonical unit-radius tube sampled on a k x k grid over [-extent, extent]^2.
/// The tube axis is the q_y axis. Sample (i, j) has q = (coordinate(i),
/// coordinate(j)) and is stored at flat index j * k + i.
class TubeTemplate {
 public:
  int grid_size() const { return grid_size_; }
  double extent() const { return extent_; }
  double ramp_width() const { return ramp_width_; }
  std::size_t sample_count() const { return values_.size(); }

  double coordinate(int i) const;
  std::span<const double> coordinates() const { return coords_; }
  double value(int i, int j) const { return values_[static_cast<std::size_t>(j * grid_size_ + i)]; }
  std::span<const double> values() const { return values_; }

  const SampleSet& full() const { return full_; }
  /// Rows with q_y >= 0: the half of the tube ahead of the center along the
  /// flow axis. Used for branch directions.
  const SampleSet& forward() const { return forward_; }
  int slice_count() const { return static_cast<int>(slices_.size()); }
  const SampleSet& slice(int s) const { return slices_.at(static_cast<std::size_t>(s)); }
  /// Slice s restricted to the forward half.
  const SampleSet& forward_slice(int s) const { return forward_slices_.at(static_cast<std::size_t>(s)); }
  bool in_slice(int s, int i, int j) const;

 private:
  friend TubeTemplate make_template(int, double, double);
  friend TubeTemplate make_slices(TubeTemplate, int);

  int grid_size_ = 0;
  double extent_ = 0.0;
  double ramp_width_ = 0.0;
  std::vector<double> coords_;
  std::vector<double> values_;
  SampleSet full_;
  SampleSet forward_;
  std::vector<SampleSet> slices_;
  std::vector<SampleSet> forward_slices_;
  std::vector<std::vector<char>> slice_membership_;
};

/// Throws std::invalid_argument unless k is odd and >= 5, extent > 1 and
/// 0 < ramp_width < extent - 1.
TubeTemplate make_template(int grid_size = 9, double extent = 1.5, double ramp_width = 0.25);

/// Attaches `count` angular-sector masks. Sector s spans polar angles
/// [pi/2 + s*2pi/count, pi/2 + (s+1)*2pi/count] (closed, so boundary samples
/// are shared). For count == 2 this is the q_x <= 0 / q_x >= 0 split.
TubeTemplate make_slices(TubeTemplate t, int count = 2);

}  // namespace tubeflow
