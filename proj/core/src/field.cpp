#include "tubeflow/field.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tubeflow/error.hpp"

namespace tubeflow {

Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  a -= std::numbers::pi;
  // fmod can land exactly on +pi after the shift for inputs just below -pi.
  if (a >= std::numbers::pi) a -= two_pi;
  return a;
}

ScalarField2D::ScalarField2D(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("ScalarField2D: dimensions must be positive");
  }
  if (!std::isfinite(fill)) throw std::invalid_argument("ScalarField2D: non-finite fill value");
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

ScalarField2D::ScalarField2D(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("ScalarField2D: dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("ScalarField2D: data length does not match width*height");
  }
  if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("ScalarField2D: non-finite value");
  }
}

double ScalarField2D::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return data_[index(x, y)];
}

DirectionField2D::DirectionField2D(int width, int height, double angle)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("DirectionField2D: dimensions must be positive");
  }
  angle_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                wrap_angle(angle));
}

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("BinaryMask: dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
               fill ? 1 : 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::from_field(const ScalarField2D& f, double threshold) {
  BinaryMask m(f.width(), f.height());
  for (std::size_t i = 0; i < f.size(); ++i) m.set(i, f[i] >= threshold);
  return m;
}

ScalarField2D BinaryMask::to_field() const {
  ScalarField2D f(width_, height_);
  for (std::size_t i = 0; i < data_.size(); ++i) f[i] = data_[i] ? 1.0 : 0.0;
  return f;
}

double sample_bilinear(const ScalarField2D& f, double x, double y) {
  const double max_x = f.width() - 1;
  const double max_y = f.height() - 1;
  x = std::clamp(x, 0.0, max_x);
  y = std::clamp(y, 0.0, max_y);
  const int x0 = std::min(static_cast<int>(x), f.width() - 1);
  const int y0 = std::min(static_cast<int>(y), f.height() - 1);
  const int x1 = std::min(x0 + 1, f.width() - 1);
  const int y1 = std::min(y0 + 1, f.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * f(x0, y0) + fx * f(x1, y0);
  const double bottom = (1.0 - fx) * f(x0, y1) + fx * f(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

Gradient gradient(const ScalarField2D& f) {
  const int w = f.width();
  const int h = f.height();
  if (w < 3 || h < 3) throw std::invalid_argument("gradient: field must be at least 3x3");
  Gradient g{ScalarField2D(w, h), ScalarField2D(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x == 0) {
        g.dx(x, y) = f(1, y) - f(0, y);
      } else if (x == w - 1) {
        g.dx(x, y) = f(w - 1, y) - f(w - 2, y);
      } else {
        g.dx(x, y) = 0.5 * (f(x + 1, y) - f(x - 1, y));
      }
      if (y == 0) {
        g.dy(x, y) = f(x, 1) - f(x, 0);
      } else if (y == h - 1) {
        g.dy(x, y) = f(x, h - 1) - f(x, h - 2);
      } else {
        g.dy(x, y) = 0.5 * (f(x, y + 1) - f(x, y - 1));
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// PGM

namespace {

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
      out.push_back(static_cast<char>(bytes_[pos_++]));
    }
    if (out.empty()) throw FormatError("pgm: truncated header");
    return out;
  }

  long integer() {
    const std::string t = token();
    if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw FormatError("pgm: malformed header field '" + t + "'");
    }
    try {
      return std::stol(t);
    } catch (const std::exception&) {
      throw FormatError("pgm: header value out of range");
    }
  }

  // Exactly one whitespace byte separates the header from binary data.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("pgm: missing whitespace after header");
    }
    return pos_ + 1;
  }

  std::size_t position() const { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ScalarField2D read_pgm(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  HeaderReader header(bytes);
  const std::string magic = header.token();
  if (magic != "P5" && magic != "P2") throw FormatError("pgm: unsupported magic number '" + magic + "'");
  const long width = header.integer();
  const long height = header.integer();
  const long maxval = header.integer();
  if (width <= 0 || height <= 0 || width > (1 << 20) || height > (1 << 20)) {
    throw FormatError("pgm: invalid dimensions");
  }
  if (maxval <= 0 || maxval > 65535) throw FormatError("pgm: maxval must be in [1, 65535]");

  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<double> data(n);
  const double scale = 1.0 / static_cast<double>(maxval);

  if (magic == "P5") {
    const std::size_t offset = header.payload_offset();
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (bytes.size() - offset < n * bpp) throw FormatError("pgm: truncated payload");
    for (std::size_t i = 0; i < n; ++i) {
      unsigned v = bytes[offset + i * bpp];
      if (bpp == 2) v = (v << 8) | bytes[offset + i * bpp + 1];
      if (v > static_cast<unsigned>(maxval)) throw FormatError("pgm: sample exceeds maxval");
      data[i] = v * scale;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      long v = 0;
      try {
        v = header.integer();
      } catch (const FormatError&) {
        throw FormatError("pgm: truncated payload");
      }
      if (v > maxval) throw FormatError("pgm: sample exceeds maxval");
      data[i] = static_cast<double>(v) * scale;
    }
  }
  return ScalarField2D(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

void write_pgm(const ScalarField2D& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << f.width() << ' ' << f.height() << "\n255\n";
  std::string payload(f.size(), '\0');
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = std::clamp(f[i], 0.0, 1.0);
    payload[i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

BinaryMask read_mask_pgm(const std::filesystem::path& path) {
  return BinaryMask::from_field(read_pgm(path), 0.5);
}

void write_mask_pgm(const BinaryMask& m, const std::filesystem::path& path) {
  write_pgm(m.to_field(), path);
}

// ---------------------------------------------------------------------------
// TFF1

std::vector<ScalarField2D> read_f32(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const auto newline = std::find(bytes.begin(), bytes.end(), '\n');
  if (newline == bytes.end()) throw FormatError("tff1: missing header line");
  std::istringstream header(std::string(bytes.begin(), newline));
  std::string magic;
  long width = 0, height = 0, channels = 0;
  header >> magic >> width >> height >> channels;
  std::string trailing;
  if (!header || magic != "TFF1" || (header >> trailing)) throw FormatError("tff1: header mismatch");
  if (width <= 0 || height <= 0 || channels <= 0 || width > (1 << 20) || height > (1 << 20) ||
      channels > 1024) {
    throw FormatError("tff1: header mismatch");
  }

  const std::size_t offset = static_cast<std::size_t>(newline - bytes.begin()) + 1;
  const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t expected = pixels * static_cast<std::size_t>(channels) * 4;
  if (bytes.size() - offset != expected) {
    throw FormatError("tff1: payload length mismatch (expected " + std::to_string(expected) +
                      " bytes, found " + std::to_string(bytes.size() - offset) + ")");
  }

  std::vector<std::vector<double>> data(static_cast<std::size_t>(channels), std::vector<double>(pixels));
  const unsigned char* p = bytes.data() + offset;
  for (std::size_t i = 0; i < pixels; ++i) {
    for (std::size_t c = 0; c < static_cast<std::size_t>(channels); ++c, p += 4) {
      const std::uint32_t word = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                 (static_cast<std::uint32_t>(p[2]) << 16) |
                                 (static_cast<std::uint32_t>(p[3]) << 24);
      const float v = std::bit_cast<float>(word);
      if (!std::isfinite(v)) throw FormatError("tff1: non-finite sample");
      data[c][i] = static_cast<double>(v);
    }
  }

  std::vector<ScalarField2D> out;
  out.reserve(data.size());
  for (auto& d : data) out.emplace_back(static_cast<int>(width), static_cast<int>(height), std::move(d));
  return out;
}

void write_f32(std::span<const ScalarField2D> channels, const std::filesystem::path& path) {
  if (channels.empty()) throw std::invalid_argument("write_f32: no channels");
  for (const auto& c : channels) {
    if (!c.same_shape(channels.front())) throw std::invalid_argument("write_f32: channel shape mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const auto& first = channels.front();
  out << "TFF1 " << first.width() << ' ' << first.height() << ' ' << channels.size() << '\n';

  std::string payload;
  payload.reserve(first.size() * channels.size() * 4);
  for (std::size_t i = 0; i < first.size(); ++i) {
    for (const auto& c : channels) {
      const auto word = std::bit_cast<std::uint32_t>(static_cast<float>(c[i]));
      payload.push_back(static_cast<char>(word & 0xffu));
      payload.push_back(static_cast<char>((word >> 8) & 0xffu));
      payload.push_back(static_cast<char>((word >> 16) & 0xffu));
      payload.push_back(static_cast<char>((word >> 24) & 0xffu));
    }
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_f32(const ScalarField2D& field, const std::filesystem::path& path) {
  write_f32(std::span<const ScalarField2D>(&field, 1), path);
}

}  // namespace tubeflow
