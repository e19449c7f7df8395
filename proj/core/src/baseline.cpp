#include "tubeflow/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tubeflow {

void FrangiConfig::validate() const {
  if (sigmas.empty()) throw std::invalid_argument("FrangiConfig: sigmas must be non-empty");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0)) throw std::invalid_argument("FrangiConfig: sigmas must be positive");
    if (i > 0 && !(sigmas[i] > sigmas[i - 1])) {
      throw std::invalid_argument("FrangiConfig: sigmas must be strictly increasing");
    }
  }
  if (!(beta > 0.0)) throw std::invalid_argument("FrangiConfig: beta must be positive");
  if (c && !(*c > 0.0)) throw std::invalid_argument("FrangiConfig: c must be positive");
}

ScalarField2D gaussian_blur(const ScalarField2D& image, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_blur: sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double v = std::exp(-(k * k) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = v;
    sum += v;
  }
  for (double& v : kernel) v /= sum;

  const int w = image.width();
  const int h = image.height();
  ScalarField2D tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[static_cast<std::size_t>(k + radius)] * image.clamped(x + k, y);
      tmp(x, y) = acc;
    }
  }
  ScalarField2D out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[static_cast<std::size_t>(k + radius)] * tmp.clamped(x, y + k);
      out(x, y) = acc;
    }
  }
  return out;
}

namespace {

struct Hessian {
  double xx, xy, yy;
};

Hessian hessian_at(const ScalarField2D& L, int x, int y) {
  const double c = L(x, y);
  Hessian h;
  h.xx = L.clamped(x + 1, y) - 2.0 * c + L.clamped(x - 1, y);
  h.yy = L.clamped(x, y + 1) - 2.0 * c + L.clamped(x, y - 1);
  h.xy = 0.25 * (L.clamped(x + 1, y + 1) - L.clamped(x - 1, y + 1) - L.clamped(x + 1, y - 1) +
                 L.clamped(x - 1, y - 1));
  return h;
}

// Eigenvalues ordered by magnitude, |l1| <= |l2|.
void eigenvalues(const Hessian& h, double& l1, double& l2) {
  const double mean = 0.5 * (h.xx + h.yy);
  const double diff = 0.5 * (h.xx - h.yy);
  const double root = std::sqrt(diff * diff + h.xy * h.xy);
  const double a = mean + root;
  const double b = mean - root;
  if (std::abs(a) <= std::abs(b)) {
    l1 = a;
    l2 = b;
  } else {
    l1 = b;
    l2 = a;
  }
}

}  // namespace

ScalarField2D frangi2d(const ScalarField2D& image, const FrangiConfig& cfg) {
  cfg.validate();
  const int w = image.width();
  const int h = image.height();
  ScalarField2D out(w, h);
  std::vector<Hessian> hess(image.size());
  const double below_one = std::nextafter(1.0, 0.0);

  for (double sigma : cfg.sigmas) {
    const ScalarField2D L = gaussian_blur(image, sigma);
    const double s2 = sigma * sigma;
    double max_norm = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        Hessian hs = hessian_at(L, x, y);
        hs.xx *= s2;
        hs.xy *= s2;
        hs.yy *= s2;
        hess[out.width() * static_cast<std::size_t>(y) + static_cast<std::size_t>(x)] = hs;
        double l1, l2;
        eigenvalues(hs, l1, l2);
        max_norm = std::max(max_norm, std::sqrt(l1 * l1 + l2 * l2));
      }
    }
    const double c = cfg.c ? *cfg.c : 0.5 * max_norm;
    if (!(c > 0.0)) continue;

    for (std::size_t i = 0; i < hess.size(); ++i) {
      double l1, l2;
      eigenvalues(hess[i], l1, l2);
      if (l2 == 0.0) continue;
      if (cfg.polarity == Polarity::bright ? l2 > 0.0 : l2 < 0.0) continue;
      const double rb = l1 / l2;
      const double s = l1 * l1 + l2 * l2;
      const double v = std::exp(-rb * rb / (2.0 * cfg.beta * cfg.beta)) * (1.0 - std::exp(-s / (2.0 * c * c)));
      out[i] = std::max(out[i], std::min(v, below_one));
    }
  }
  return out;
}

}  // namespace tubeflow
