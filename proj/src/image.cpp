#include "adaptune/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adaptune {

int mirror_index(int i, int n) noexcept {
  if (n <= 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

Plane::Plane(int w, int h, double fill)
    : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {
  if (w < 0 || h < 0) throw ArgumentError("plane dimensions must be non-negative");
}

RasterImage::RasterImage(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0) throw ArgumentError("image dimensions must be positive");
  if (channels != 1 && channels != 3) throw ArgumentError("image must have 1 or 3 channels");
  samples_.assign(plane_size() * channels, fill);
}

RasterImage RasterImage::from_plane(const Plane& p) {
  RasterImage img(p.width, p.height, 1);
  std::copy(p.values.begin(), p.values.end(), img.samples_.begin());
  return img;
}

RasterImage RasterImage::from_planes(std::span<const Plane> planes) {
  if (planes.size() != 1 && planes.size() != 3) throw ArgumentError("need 1 or 3 planes");
  RasterImage img(planes[0].width, planes[0].height, static_cast<int>(planes.size()));
  for (std::size_t c = 0; c < planes.size(); ++c) img.set_channel(static_cast<int>(c), planes[c]);
  return img;
}

Plane RasterImage::channel_plane(int c) const {
  Plane p(width_, height_);
  auto src = channel(c);
  std::copy(src.begin(), src.end(), p.values.begin());
  return p;
}

void RasterImage::set_channel(int c, const Plane& p) {
  if (p.width != width_ || p.height != height_) throw ArgumentError("plane/image shape mismatch");
  std::copy(p.values.begin(), p.values.end(), channel(c).begin());
}

void RasterImage::clamp() {
  for (double& s : samples_)
    if (!std::isnan(s)) s = std::clamp(s, 0.0, 1.0);
}

bool RasterImage::all_finite() const {
  return std::all_of(samples_.begin(), samples_.end(), [](double s) { return std::isfinite(s); });
}

RasterImage RasterImage::crop(int x0, int y0, int w, int h) const {
  if (x0 < 0 || y0 < 0 || x0 + w > width_ || y0 + h > height_)
    throw ArgumentError("crop window outside image");
  RasterImage out(w, h, channels_);
  for (int c = 0; c < channels_; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(x, y, c) = at(x0 + x, y0 + y, c);
  return out;
}

CfaLayout parse_cfa(std::string_view name) {
  if (name == "RGGB") return CfaLayout::RGGB;
  if (name == "BGGR") return CfaLayout::BGGR;
  if (name == "GRBG") return CfaLayout::GRBG;
  if (name == "GBRG") return CfaLayout::GBRG;
  throw ArgumentError("unknown CFA layout '" + std::string(name) + "'");
}

std::string_view to_string(CfaLayout layout) {
  switch (layout) {
    case CfaLayout::RGGB: return "RGGB";
    case CfaLayout::BGGR: return "BGGR";
    case CfaLayout::GRBG: return "GRBG";
    case CfaLayout::GBRG: return "GBRG";
  }
  return "RGGB";
}

int cfa_color(CfaLayout layout, int x, int y) noexcept {
  // 2x2 tiles listed as (0,0) (1,0) (0,1) (1,1).
  static constexpr int tiles[4][4] = {
      {0, 1, 1, 2},  // RGGB
      {2, 1, 1, 0},  // BGGR
      {1, 0, 2, 1},  // GRBG
      {1, 2, 0, 1},  // GBRG
  };
  return tiles[static_cast<int>(layout)][(y & 1) * 2 + (x & 1)];
}

BayerMosaic::BayerMosaic(RasterImage samples, CfaLayout layout)
    : samples_(std::move(samples)), layout_(layout) {
  if (samples_.channels() != 1) throw ArgumentError("Bayer mosaic must be single-channel");
  if (samples_.width() % 2 != 0 || samples_.height() % 2 != 0)
    throw ArgumentError("Bayer mosaic dimensions must be even");
}

BlurKernel::BlurKernel(int side, std::vector<double> weights, bool renormalize)
    : side_(side), weights_(std::move(weights)) {
  if (side < 1 || side % 2 == 0) throw ArgumentError("kernel side must be odd and positive");
  if (weights_.size() != static_cast<std::size_t>(side) * side)
    throw ArgumentError("kernel needs side*side weights");
  for (double w : weights_)
    if (!std::isfinite(w) || w < 0.0) throw ArgumentError("kernel weights must be finite and >= 0");
  const double sum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (renormalize) {
    if (sum <= 0.0) throw ArgumentError("kernel weights sum to zero");
    for (double& w : weights_) w /= sum;
  } else if (std::abs(sum - 1.0) > 1e-9) {
    throw ArgumentError("kernel weights must sum to 1");
  }
}

}  // namespace adaptune
