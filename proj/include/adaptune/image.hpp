#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adaptune {

/// Bad arguments or shape mismatches.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File I/O failures. The message always names the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reflect-without-repeat boundary: -1 -> 1, n -> n-2. Valid for any i.
int mirror_index(int i, int n) noexcept;

/// Single-channel real plane, row-major. Used for feature planes,
/// parameter planes and intermediate buffers whose range is not [0,1].
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0);

  double& operator()(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double operator()(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  /// Mirror-padded read.
  double mirrored(int x, int y) const { return (*this)(mirror_index(x, width), mirror_index(y, height)); }
  std::size_t size() const { return values.size(); }
  bool same_shape(const Plane& o) const { return width == o.width && height == o.height; }
};

/// Planar real-valued image with 1 or 3 channels. Samples are expected in
/// [0,1]; loaders and synthesis operations clamp.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, double fill = 0.0);

  static RasterImage from_plane(const Plane& p);
  static RasterImage from_planes(std::span<const Plane> planes);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t plane_size() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return samples_.empty(); }

  double& at(int x, int y, int c = 0) { return samples_[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return samples_[index(x, y, c)]; }
  double mirrored(int x, int y, int c = 0) const {
    return at(mirror_index(x, width_), mirror_index(y, height_), c);
  }

  std::span<double> samples() { return samples_; }
  std::span<const double> samples() const { return samples_; }
  std::span<double> channel(int c) { return {samples_.data() + c * plane_size(), plane_size()}; }
  std::span<const double> channel(int c) const {
    return {samples_.data() + c * plane_size(), plane_size()};
  }
  std::span<const double> row(int y, int c = 0) const {
    return {samples_.data() + c * plane_size() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }

  Plane channel_plane(int c) const;
  void set_channel(int c, const Plane& p);

  bool same_shape(const RasterImage& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }
  /// Clamps to [0,1]; NaN samples are left as they are.
  void clamp();
  bool all_finite() const;

  RasterImage crop(int x0, int y0, int w, int h) const;

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return c * plane_size() + static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> samples_;
};

enum class CfaLayout { RGGB, BGGR, GRBG, GBRG };

CfaLayout parse_cfa(std::string_view name);
std::string_view to_string(CfaLayout layout);

/// Color carried by the CFA site (x,y): 0 = R, 1 = G, 2 = B.
int cfa_color(CfaLayout layout, int x, int y) noexcept;

/// Single-channel Bayer mosaic. Width and height are even.
class BayerMosaic {
 public:
  BayerMosaic(RasterImage samples, CfaLayout layout);

  int width() const { return samples_.width(); }
  int height() const { return samples_.height(); }
  CfaLayout layout() const { return layout_; }
  int color(int x, int y) const { return cfa_color(layout_, x, y); }
  double at(int x, int y) const { return samples_.at(x, y); }
  double mirrored(int x, int y) const { return samples_.mirrored(x, y); }
  const RasterImage& image() const { return samples_; }

 private:
  RasterImage samples_;
  CfaLayout layout_;
};

/// Square, odd-sided, non-negative correlation kernel whose weights sum to 1.
class BlurKernel {
 public:
  /// Validates side/weights; renormalizes to unit sum when `renormalize`.
  BlurKernel(int side, std::vector<double> weights, bool renormalize = false);
  static BlurKernel identity() { return BlurKernel(1, {1.0}); }

  int side() const { return side_; }
  int radius() const { return side_ / 2; }
  double at(int kx, int ky) const { return weights_[static_cast<std::size_t>(ky) * side_ + kx]; }
  std::span<const double> weights() const { return weights_; }

 private:
  int side_;
  std::vector<double> weights_;
};

}  // namespace adaptune
