#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace tubeflow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Unit vector for an angle in image coordinates (x right, y down).
Vec2 unit_vector(double angle);

/// Wraps an angle into [-pi, pi).
double wrap_angle(double angle);

/// Dense row-major grid of doubles. Used for images, radius maps and
/// vesselness maps.
class ScalarField2D {
 public:
  ScalarField2D() = default;
  ScalarField2D(int width, int height, double fill = 0.0);
  ScalarField2D(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator()(int x, int y) const { return data_[index(x, y)]; }
  double& operator()(int x, int y) { return data_[index(x, y)]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  /// Value at the nearest valid pixel (constant edge extension).
  double clamped(int x, int y) const;

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  bool same_shape(const ScalarField2D& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool operator==(const ScalarField2D&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Per-pixel direction stored as an angle in [-pi, pi). The direction
/// vector (cos, sin) is unit length by construction.
class DirectionField2D {
 public:
  DirectionField2D() = default;
  DirectionField2D(int width, int height, double angle = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return angle_.size(); }

  double angle(int x, int y) const { return angle_[index(x, y)]; }
  double angle(std::size_t i) const { return angle_[i]; }
  void set_angle(int x, int y, double a) { angle_[index(x, y)] = wrap_angle(a); }
  void set_angle(std::size_t i, double a) { angle_[i] = wrap_angle(a); }
  Vec2 direction(int x, int y) const { return unit_vector(angle(x, y)); }

  std::span<const double> angles() const { return angle_; }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> angle_;
};

/// Binary mask (0 = background, 1 = foreground).
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  bool operator()(int x, int y) const { return data_[index(x, y)] != 0; }
  void set(int x, int y, bool v) { data_[index(x, y)] = v ? 1 : 0; }
  bool operator[](std::size_t i) const { return data_[i] != 0; }
  void set(std::size_t i, bool v) { data_[i] = v ? 1 : 0; }

  std::size_t count() const;
  bool same_shape(const BinaryMask& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool same_shape(const ScalarField2D& other) const {
    return width_ == other.width() && height_ == other.height();
  }
  bool operator==(const BinaryMask&) const = default;

  /// Mask from a field: value >= threshold is foreground.
  static BinaryMask from_field(const ScalarField2D& f, double threshold = 0.5);
  /// Field with values 0 / 1.
  ScalarField2D to_field() const;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Bilinear interpolation; out-of-range coordinates are clamped to the
/// nearest pixel center.
double sample_bilinear(const ScalarField2D& f, double x, double y);

struct Gradient {
  ScalarField2D dx;
  ScalarField2D dy;
};

/// Central differences inside, one-sided differences on the border.
/// Throws std::invalid_argument if either dimension is below 3.
Gradient gradient(const ScalarField2D& f);

// PGM (P2/P5). Values are normalized to [0,1] on read; on write they are
// clamped to [0,1] and quantized to 8-bit binary P5.
ScalarField2D read_pgm(const std::filesystem::path& path);
void write_pgm(const ScalarField2D& f, const std::filesystem::path& path);
BinaryMask read_mask_pgm(const std::filesystem::path& path);
void write_mask_pgm(const BinaryMask& m, const std::filesystem::path& path);

// TFF1: "TFF1 <width> <height> <channels>\n" then little-endian float32,
// row-major, channels interleaved.
std::vector<ScalarField2D> read_f32(const std::filesystem::path& path);
void write_f32(std::span<const ScalarField2D> channels, const std::filesystem::path& path);
void write_f32(const ScalarField2D& field, const std::filesystem::path& path);

}  // namespace tubeflow
