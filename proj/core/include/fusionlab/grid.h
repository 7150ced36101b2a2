#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fusionlab {

// Dense H x W x C grid of doubles, row-major with channels innermost.
// Used for latents, images, noise predictions and salience maps alike.
class Raster {
 public:
  Raster() = default;
  Raster(int height, int width, int channels, double fill = 0.0);
  Raster(int height, int width, int channels, std::vector<double> data);

  static Raster constant_like(const Raster& shape, double value);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  std::size_t pixels() const {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }

  double& at(int row, int col, int channel = 0) {
    return data_[index(row, col, channel)];
  }
  double at(int row, int col, int channel = 0) const {
    return data_[index(row, col, channel)];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Raster& other) const;
  bool all_finite() const;
  double sum() const;

  bool operator==(const Raster& other) const = default;

 private:
  std::size_t index(int row, int col, int channel) const {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(col)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(channel);
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Square, normalized smoothing kernel of odd size.
class Kernel2D {
 public:
  Kernel2D(int size, std::vector<double> weights);

  int size() const { return size_; }
  int radius() const { return size_ / 2; }
  double weight(int row, int col) const {
    return weights_[static_cast<std::size_t>(row * size_ + col)];
  }
  const std::vector<double>& weights() const { return weights_; }

 private:
  int size_;
  std::vector<double> weights_;
};

// Sampled Gaussian exp(-d^2 / 2 sigma^2), normalized to unit sum.
Kernel2D gaussian_kernel(int size, double sigma);

// Per-channel 2-D convolution with replicate-edge padding. Output has the
// input's shape.
Raster convolve_smooth(const Raster& input, const Kernel2D& kernel);

// Softmax over every pixel of a single-channel raster, stabilized by
// subtracting the maximum.
Raster softmax_over_pixels(const Raster& input);

Raster abs(const Raster& a);
Raster add(const Raster& a, const Raster& b);
Raster sub(const Raster& a, const Raster& b);
Raster scale(const Raster& a, double factor);
Raster hadamard(const Raster& a, const Raster& b);
// a + factor * b, evaluated in a single pass.
Raster axpy(const Raster& a, double factor, const Raster& b);

enum class ElementwiseOp { kAbs, kAdd, kSub, kScale, kHadamard };

// Dispatching form. `kAbs` ignores the second operand; `kScale` takes the
// scalar overload.
Raster elementwise(ElementwiseOp op, const Raster& a, const Raster& b);
Raster elementwise(ElementwiseOp op, const Raster& a, double b);

// Mean absolute value across channels; returns a single-channel raster.
Raster mean_abs_channels(const Raster& a);

}  // namespace fusionlab
