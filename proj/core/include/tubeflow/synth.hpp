#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tubeflow/field.hpp"

namespace tubeflow {

struct SceneConfig {
  int width = 128;
  int height = 128;
  double root_radius = 5.0;
  double radius_decay = 0.78;
  double branch_angle_min = 25.0;  // degrees
  double branch_angle_max = 50.0;  // degrees
  double min_radius = 1.2;
  int max_depth = 5;
  double contrast = 0.8;
  double ramp_width = 0.25;  // profile ramp, in units of the local radius
  std::uint64_t seed = 0;

  void validate() const;
};

/// Straight capsule: all points within `radius` of the segment start-end.
struct Segment {
  Vec2 start;
  Vec2 end;
  double radius = 0.0;
  int parent = -1;  // index of the parent segment, -1 for the root
  int depth = 0;
};

/// Axis-aligned box centered on a branch point; covers pixel centers with
/// cx - half <= x < cx + half (same for y).
struct BifurcationBox {
  double cx = 0.0;
  double cy = 0.0;
  double half = 0.0;
};

struct SyntheticScene {
  ScalarField2D image;
  BinaryMask mask;
  std::vector<Segment> segments;
  std::vector<BifurcationBox> bifurcation_boxes;
};

/// Distance from a point to a segment's axis.
double distance_to_segment(Vec2 p, const Segment& s);

struct Rendering {
  ScalarField2D image;
  BinaryMask mask;
};

/// Bright capsules on a zero background. Intensity is
/// contrast * tube_profile(d / r, ramp_width) maximized over segments; the
/// mask is d <= r for any segment.
Rendering render_segments(std::span<const Segment> segments, int width, int height, double contrast,
                          double ramp_width);

/// Recursive binary tree. Each branch point spawns a left and a right child
/// with radius r * decay, deflected by angles drawn from the branch range.
/// Growth stops at max_depth, when the child radius would fall below
/// min_radius, or when a segment had to be shortened to stay inside the
/// image. Deterministic for a given seed.
SyntheticScene generate_tree(const SceneConfig& cfg);

/// image + N(0, sigma^2) per pixel, clamped to [0, 1]. sigma == 0 returns
/// the input unchanged. Throws std::invalid_argument for sigma < 0.
ScalarField2D add_gaussian_noise(const ScalarField2D& image, double sigma, std::uint64_t seed);

std::string segments_to_json(std::span<const Segment> segments);
std::string boxes_to_json(std::span<const BifurcationBox> boxes);
std::vector<BifurcationBox> boxes_from_json(const std::string& text);
std::vector<BifurcationBox> read_boxes(const std::filesystem::path& path);

/// Writes image.pgm, mask.pgm, segments.json and bifurc_boxes.json.
void write_scene(const SyntheticScene& scene, const std::filesystem::path& dir);

}  // namespace tubeflow
