#include "tubeflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tubeflow/error.hpp"
#include "tubeflow/template.hpp"

namespace tubeflow {

void SceneConfig::validate() const {
  if (width < 8 || height < 8) throw std::invalid_argument("SceneConfig: image must be at least 8x8");
  if (!(root_radius > 0.0)) throw std::invalid_argument("SceneConfig: root_radius must be positive");
  if (!(min_radius > 0.0) || !(min_radius < root_radius)) {
    throw std::invalid_argument("SceneConfig: need 0 < min_radius < root_radius");
  }
  if (!(radius_decay > 0.0 && radius_decay < 1.0)) throw std::invalid_argument("SceneConfig: radius_decay must be in (0,1)");
  if (!(branch_angle_min >= 0.0) || !(branch_angle_max >= branch_angle_min) || !(branch_angle_max < 90.0)) {
    throw std::invalid_argument("SceneConfig: branch angle range must satisfy 0 <= min <= max < 90");
  }
  if (max_depth < 0) throw std::invalid_argument("SceneConfig: max_depth must be non-negative");
  if (!(contrast > 0.0 && contrast <= 1.0)) throw std::invalid_argument("SceneConfig: contrast must be in (0,1]");
  if (!(ramp_width > 0.0 && ramp_width < 1.0)) throw std::invalid_argument("SceneConfig: ramp_width must be in (0,1)");
}

double distance_to_segment(Vec2 p, const Segment& s) {
  const double dx = s.end.x - s.start.x;
  const double dy = s.end.y - s.start.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - s.start.x) * dx + (p.y - s.start.y) * dy) / len2, 0.0, 1.0);
  const double ex = p.x - (s.start.x + t * dx);
  const double ey = p.y - (s.start.y + t * dy);
  return std::sqrt(ex * ex + ey * ey);
}

Rendering render_segments(std::span<const Segment> segments, int width, int height, double contrast,
                          double ramp_width) {
  Rendering out{ScalarField2D(width, height), BinaryMask(width, height)};
  for (const Segment& s : segments) {
    const double reach = s.radius * (1.0 + ramp_width) + 1.0;
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(s.start.x, s.end.x) - reach)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(s.start.x, s.end.x) + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(s.start.y, s.end.y) - reach)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(s.start.y, s.end.y) + reach)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double d = distance_to_segment({static_cast<double>(x), static_cast<double>(y)}, s);
        const double v = std::clamp(contrast * tube_profile(d / s.radius, ramp_width), 0.0, 1.0);
        if (v > out.image(x, y)) out.image(x, y) = v;
        if (d <= s.radius) out.mask.set(x, y, true);
      }
    }
  }
  return out;
}

namespace {

class TreeBuilder {
 public:
  explicit TreeBuilder(const SceneConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

  SyntheticScene build() {
    const double w = cfg_.width;
    const double h = cfg_.height;
    const Vec2 start{uniform(0.35, 0.65) * (w - 1), h - 1.0 - margin()};
    const double angle = -std::numbers::pi / 2.0 + deg(uniform(-15.0, 15.0));
    const double length = uniform(0.30, 0.40) * h;
    grow(start, angle, length, cfg_.root_radius, -1, 0);
    SyntheticScene scene;
    Rendering r = render_segments(segments_, cfg_.width, cfg_.height, cfg_.contrast, cfg_.ramp_width);
    scene.image = std::move(r.image);
    scene.mask = std::move(r.mask);
    scene.segments = std::move(segments_);
    scene.bifurcation_boxes = std::move(boxes_);
    return scene;
  }

 private:
  static double deg(double d) { return d * std::numbers::pi / 180.0; }
  double margin() const { return 2.0; }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  // Longest ray from p along angle that stays inside the margin box.
  double fit_length(Vec2 p, double angle, double wanted) const {
    const Vec2 u = unit_vector(angle);
    const double lo_x = margin(), hi_x = cfg_.width - 1.0 - margin();
    const double lo_y = margin(), hi_y = cfg_.height - 1.0 - margin();
    double t = wanted;
    if (u.x > 1e-12) t = std::min(t, (hi_x - p.x) / u.x);
    if (u.x < -1e-12) t = std::min(t, (lo_x - p.x) / u.x);
    if (u.y > 1e-12) t = std::min(t, (hi_y - p.y) / u.y);
    if (u.y < -1e-12) t = std::min(t, (lo_y - p.y) / u.y);
    return std::max(0.0, t);
  }

  void grow(Vec2 start, double angle, double length, double radius, int parent, int depth) {
    const double fitted = fit_length(start, angle, length);
    const Vec2 u = unit_vector(angle);
    const Vec2 end{start.x + fitted * u.x, start.y + fitted * u.y};
    const int index = static_cast<int>(segments_.size());
    segments_.push_back({start, end, radius, parent, depth});

    const double child_radius = radius * cfg_.radius_decay;
    const bool clipped = fitted < length;
    if (clipped || depth >= cfg_.max_depth || child_radius < cfg_.min_radius) return;

    boxes_.push_back({end.x, end.y, uniform(2.0, 3.0) * radius});
    const double left = angle - deg(uniform(cfg_.branch_angle_min, cfg_.branch_angle_max));
    const double right = angle + deg(uniform(cfg_.branch_angle_min, cfg_.branch_angle_max));
    const double left_len = length * uniform(0.65, 0.85);
    const double right_len = length * uniform(0.65, 0.85);
    grow(end, left, left_len, child_radius, index, depth + 1);
    grow(end, right, right_len, child_radius, index, depth + 1);
  }

  const SceneConfig& cfg_;
  std::mt19937_64 rng_;
  std::vector<Segment> segments_;
  std::vector<BifurcationBox> boxes_;
};

}  // namespace

SyntheticScene generate_tree(const SceneConfig& cfg) {
  cfg.validate();
  return TreeBuilder(cfg).build();
}

ScalarField2D add_gaussian_noise(const ScalarField2D& image, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("add_gaussian_noise: sigma must be non-negative");
  if (sigma == 0.0) return image;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  ScalarField2D out = image;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i] + noise(rng), 0.0, 1.0);
  return out;
}

std::string segments_to_json(std::span<const Segment> segments) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Segment& s : segments) {
    arr.push_back({{"x0", s.start.x}, {"y0", s.start.y}, {"x1", s.end.x}, {"y1", s.end.y}, {"r", s.radius}});
  }
  return arr.dump(1);
}

std::string boxes_to_json(std::span<const BifurcationBox> boxes) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const BifurcationBox& b : boxes) arr.push_back({{"cx", b.cx}, {"cy", b.cy}, {"half", b.half}});
  return arr.dump(1);
}

std::vector<BifurcationBox> boxes_from_json(const std::string& text) {
  std::vector<BifurcationBox> out;
  try {
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw FormatError("boxes: expected a JSON array");
    for (const auto& b : arr) {
      out.push_back({b.at("cx").get<double>(), b.at("cy").get<double>(), b.at("half").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("boxes: ") + e.what());
  }
  return out;
}

std::vector<BifurcationBox> read_boxes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return boxes_from_json(ss.str());
}

void write_scene(const SyntheticScene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_pgm(scene.image, dir / "image.pgm");
  write_mask_pgm(scene.mask, dir / "mask.pgm");
  const auto write_text = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot write " + p.string());
    out << text << '\n';
  };
  write_text(dir / "segments.json", segments_to_json(scene.segments));
  write_text(dir / "bifurc_boxes.json", boxes_to_json(scene.bifurcation_boxes));
}

}  // namespace tubeflow
