#include "fusionlab/grid.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fusionlab {
namespace {

void require_same_shape(const Raster& a, const Raster& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" +
                                std::to_string(a.height()) + "x" +
                                std::to_string(a.width()) + "x" +
                                std::to_string(a.channels()) + " vs " +
                                std::to_string(b.height()) + "x" +
                                std::to_string(b.width()) + "x" +
                                std::to_string(b.channels()) + ")");
  }
}

template <typename Fn>
Raster map2(const Raster& a, const Raster& b, const char* op, Fn fn) {
  require_same_shape(a, b, op);
  Raster out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(a[i], b[i]);
  return out;
}

}  // namespace

Raster::Raster(int height, int width, int channels, double fill)
    : Raster(height, width, channels,
             std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) *
                                     static_cast<std::size_t>(std::max(width, 0)) *
                                     static_cast<std::size_t>(std::max(channels, 0)),
                                 fill)) {}

Raster::Raster(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw std::invalid_argument("Raster: dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(height) *
                          static_cast<std::size_t>(width) *
                          static_cast<std::size_t>(channels)) {
    throw std::invalid_argument("Raster: data length must equal H*W*C");
  }
}

Raster Raster::constant_like(const Raster& shape, double value) {
  return Raster(shape.height(), shape.width(), shape.channels(), value);
}

bool Raster::same_shape(const Raster& other) const {
  return height_ == other.height_ && width_ == other.width_ &&
         channels_ == other.channels_;
}

bool Raster::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

double Raster::sum() const {
  return std::accumulate(data_.begin(), data_.end(), 0.0);
}

Kernel2D::Kernel2D(int size, std::vector<double> weights)
    : size_(size), weights_(std::move(weights)) {
  if (size < 1 || size % 2 == 0) {
    throw std::invalid_argument("Kernel2D: size must be odd and positive");
  }
  if (weights_.size() != static_cast<std::size_t>(size * size)) {
    throw std::invalid_argument("Kernel2D: expected size*size weights");
  }
}

Kernel2D gaussian_kernel(int size, double sigma) {
  if (size < 1 || size % 2 == 0) {
    throw std::invalid_argument("gaussian_kernel: size must be odd and >= 1");
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  }
  const int r = size / 2;
  std::vector<double> w(static_cast<std::size_t>(size * size));
  double total = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double v = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
      w[static_cast<std::size_t>((dy + r) * size + (dx + r))] = v;
      total += v;
    }
  }
  for (double& v : w) v /= total;
  return Kernel2D(size, std::move(w));
}

Raster convolve_smooth(const Raster& input, const Kernel2D& kernel) {
  const int h = input.height();
  const int w = input.width();
  const int r = kernel.radius();
  Raster out = Raster::constant_like(input, 0.0);
  for (int c = 0; c < input.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int ky = -r; ky <= r; ++ky) {
          const int sy = std::clamp(y + ky, 0, h - 1);
          for (int kx = -r; kx <= r; ++kx) {
            const int sx = std::clamp(x + kx, 0, w - 1);
            acc += kernel.weight(ky + r, kx + r) * input.at(sy, sx, c);
          }
        }
        out.at(y, x, c) = acc;
      }
    }
  }
  return out;
}

Raster softmax_over_pixels(const Raster& input) {
  if (input.channels() != 1) {
    throw std::invalid_argument(
        "softmax_over_pixels: expected a single-channel raster");
  }
  const auto v = input.values();
  const double peak = *std::max_element(v.begin(), v.end());
  Raster out = input;
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(input[i] - peak);
    total += out[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= total;
  return out;
}

Raster abs(const Raster& a) {
  Raster out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::fabs(a[i]);
  return out;
}

Raster add(const Raster& a, const Raster& b) {
  return map2(a, b, "add", [](double x, double y) { return x + y; });
}

Raster sub(const Raster& a, const Raster& b) {
  return map2(a, b, "sub", [](double x, double y) { return x - y; });
}

Raster scale(const Raster& a, double factor) {
  Raster out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * factor;
  return out;
}

Raster hadamard(const Raster& a, const Raster& b) {
  return map2(a, b, "hadamard", [](double x, double y) { return x * y; });
}

Raster axpy(const Raster& a, double factor, const Raster& b) {
  return map2(a, b, "axpy",
              [factor](double x, double y) { return x + factor * y; });
}

Raster elementwise(ElementwiseOp op, const Raster& a, const Raster& b) {
  switch (op) {
    case ElementwiseOp::kAbs:
      return abs(a);
    case ElementwiseOp::kAdd:
      return add(a, b);
    case ElementwiseOp::kSub:
      return sub(a, b);
    case ElementwiseOp::kHadamard:
      return hadamard(a, b);
    case ElementwiseOp::kScale:
      break;
  }
  throw std::invalid_argument("elementwise: scale takes a scalar operand");
}

Raster elementwise(ElementwiseOp op, const Raster& a, double b) {
  switch (op) {
    case ElementwiseOp::kAbs:
      return abs(a);
    case ElementwiseOp::kScale:
      return scale(a, b);
    case ElementwiseOp::kAdd:
      return add(a, Raster::constant_like(a, b));
    case ElementwiseOp::kSub:
      return sub(a, Raster::constant_like(a, b));
    case ElementwiseOp::kHadamard:
      return hadamard(a, Raster::constant_like(a, b));
  }
  throw std::invalid_argument("elementwise: unknown op");
}

Raster mean_abs_channels(const Raster& a) {
  Raster out(a.height(), a.width(), 1);
  const double inv = 1.0 / a.channels();
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      double acc = 0.0;
      for (int c = 0; c < a.channels(); ++c) acc += std::fabs(a.at(y, x, c));
      out.at(y, x) = acc * inv;
    }
  }
  return out;
}

}  // namespace fusionlab
