#pragma once
// Local descriptors and per-pixel feature vectors. Slot 0 of every feature
// vector is the constant 1; slots 1..F-1 hold one descriptor each.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "adaptune/image.hpp"

namespace adaptune {

struct AnlmConfig;

enum class DescriptorKind { variance, entropy, gradient_entropy, mean, std_dev, mean_std_ratio };
enum class FeatureSource { luminance, bayer_r, bayer_g, bayer_b };

std::string_view to_string(DescriptorKind k);
std::string_view to_string(FeatureSource s);
DescriptorKind parse_descriptor_kind(std::string_view s);
FeatureSource parse_feature_source(std::string_view s);

inline constexpr int kDefaultBins = 32;
inline constexpr double kRatioEpsilon = 1e-6;

struct Descriptor {
  DescriptorKind kind = DescriptorKind::variance;
  int window = 3;
  FeatureSource source = FeatureSource::luminance;
  int bins = kDefaultBins;

  friend bool operator==(const Descriptor&, const Descriptor&) = default;
};

struct FeatureSpec {
  std::vector<Descriptor> descriptors;

  /// F, including the unary slot.
  int size() const { return 1 + static_cast<int>(descriptors.size()); }
  bool uses_bayer() const;
  int largest_window() const;
  void validate() const;

  /// Denoising set: variance 3,5; entropy 3,7; gradient entropy 3,7 (F = 7).
  static FeatureSpec denoising();
  /// Demosaicing set: variance, entropy, gradient entropy at 7x7 on each
  /// Bayer channel (F = 10).
  static FeatureSpec demosaicing();
  /// Deblurring set: mean, std, std/mean at 5x5 and 9x9 (F = 7).
  static FeatureSpec deblurring();

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

/// Per-feature z-score statistics; slot 0 is always (0, 1).
struct FeatureNorm {
  std::vector<double> mean;
  std::vector<double> stddev;

  static FeatureNorm identity(int features);
  int size() const { return static_cast<int>(mean.size()); }

  friend bool operator==(const FeatureNorm&, const FeatureNorm&) = default;
};

/// Pixel-major per-pixel feature vectors.
class FeatureMap {
 public:
  FeatureMap(int width, int height, int features);

  int width() const { return width_; }
  int height() const { return height_; }
  int features() const { return features_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  std::span<const double> at(std::size_t pixel) const {
    return {values_.data() + pixel * features_, static_cast<std::size_t>(features_)};
  }
  std::span<const double> at(int x, int y) const {
    return at(static_cast<std::size_t>(y) * width_ + x);
  }
  std::span<double> at(std::size_t pixel) {
    return {values_.data() + pixel * features_, static_cast<std::size_t>(features_)};
  }

  Plane plane(int k) const;
  /// k must be >= 1: slot 0 stays the constant 1.
  void set_plane(int k, const Plane& p);

  /// Statistics applied to the values, if any.
  const std::optional<FeatureNorm>& normalization() const { return norm_; }
  void set_normalization(std::optional<FeatureNorm> n) { norm_ = std::move(n); }
  bool normalized() const { return norm_.has_value(); }

 private:
  int width_;
  int height_;
  int features_;
  std::vector<double> values_;
  std::optional<FeatureNorm> norm_;
};

// ---- descriptor planes (mirror padded, population statistics)
Plane local_mean(const Plane& img, int window);
Plane local_variance(const Plane& img, int window);
Plane local_std(const Plane& img, int window);
Plane mean_std_ratio(const Plane& img, int window);
/// Shannon entropy in bits of a `bins`-bin histogram on [0,1].
Plane local_entropy(const Plane& img, int window, int bins = kDefaultBins);
/// Central-difference gradient magnitude sqrt(gx^2 + gy^2) with
/// gx = f(x+1) - f(x-1), clipped to [0, sqrt 2]; entropy over [0, sqrt 2].
Plane local_gradient_entropy(const Plane& img, int window, int bins = kDefaultBins);
Plane gradient_magnitude(const Plane& img, int step = 1);

/// Luminance descriptors on a 1- or 3-channel image (3 channels are
/// converted to luma first). Bayer sources are rejected.
FeatureMap build_feature_map(const RasterImage& img, const FeatureSpec& spec);
/// Bayer descriptors use only same-color sites inside each window; the
/// gradient uses same-color neighbours two sites away. Luminance sources
/// read the raw mosaic plane.
FeatureMap build_feature_map(const BayerMosaic& mosaic, const FeatureSpec& spec);

/// Filters slots 1..F-1 with non-adaptive NLM (9x9 patches, h = 0.4 sigma);
/// neighbour search and weights are computed on `guide`.
FeatureMap denoise_feature_map(const FeatureMap& fm, const RasterImage& guide, double sigma);
FeatureMap denoise_feature_map(const FeatureMap& fm, const RasterImage& guide, double sigma,
                               const AnlmConfig& cfg);

}  // namespace adaptune
