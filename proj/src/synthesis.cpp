#include "adaptune/synthesis.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <cmath>

#include "adaptune/simd/kernels.hpp"

namespace adaptune {

RasterImage to_grayscale(const RasterImage& img) {
  if (img.channels() == 1) return img;
  if (img.channels() != 3) throw ArgumentError("to_grayscale expects 1 or 3 channels");
  RasterImage out(img.width(), img.height(), 1);
  auto r = img.channel(0), g = img.channel(1), b = img.channel(2);
  auto dst = out.channel(0);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
  out.clamp();
  return out;
}

RasterImage add_gaussian_noise(const RasterImage& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ArgumentError("noise sigma must be >= 0");
  RasterImage out = img;
  if (sigma == 0.0) return out;
  boost::random::mt19937_64 rng(seed);
  boost::random::normal_distribution<double> normal(0.0, sigma);
  for (double& s : out.samples()) s += normal(rng);
  out.clamp();
  return out;
}

RasterImage add_poisson_noise(const RasterImage& img, double photon_max, std::uint64_t seed) {
  if (!(photon_max >= 1.0)) throw ArgumentError("photon_max must be >= 1");
  RasterImage out = img;
  boost::random::mt19937_64 rng(seed);
  for (double& s : out.samples()) {
    const double mean = std::clamp(s, 0.0, 1.0) * photon_max;
    if (mean <= 0.0) {
      s = 0.0;
      continue;
    }
    boost::random::poisson_distribution<long long, double> poisson(mean);
    s = static_cast<double>(poisson(rng)) / photon_max;
  }
  out.clamp();
  return out;
}

BlurKernel gaussian_kernel(int side, double sigma) {
  if (side < 1 || side % 2 == 0) throw ArgumentError("gaussian kernel side must be odd");
  if (!(sigma > 0.0)) throw ArgumentError("gaussian kernel sigma must be > 0");
  const int r = side / 2;
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(side) * side);
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) w.push_back(std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)));
  return BlurKernel(side, std::move(w), /*renormalize=*/true);
}

namespace {

// Mirror-padded copy with `pad` extra samples on every side.
Plane pad_mirror(const Plane& in, int pad) {
  Plane out(in.width + 2 * pad, in.height + 2 * pad);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out(x, y) = in.mirrored(x - pad, y - pad);
  return out;
}

}  // namespace

Plane correlate(const Plane& in, const BlurKernel& k) {
  const int r = k.radius();
  const Plane padded = pad_mirror(in, r);
  Plane out(in.width, in.height);
  const std::size_t w = static_cast<std::size_t>(in.width);
  for (int y = 0; y < in.height; ++y) {
    std::span<double> dst(out.values.data() + y * w, w);
    for (int ky = 0; ky < k.side(); ++ky)
      for (int kx = 0; kx < k.side(); ++kx) {
        const double* src = padded.values.data() + static_cast<std::size_t>(y + ky) * padded.width + kx;
        simd::axpy(k.at(kx, ky), std::span<const double>(src, w), dst);
      }
  }
  return out;
}

Plane correlate_adjoint(const Plane& in, const BlurKernel& k) {
  const int r = k.radius();
  Plane padded(in.width + 2 * r, in.height + 2 * r);
  const std::size_t w = static_cast<std::size_t>(in.width);
  for (int y = 0; y < in.height; ++y) {
    std::span<const double> src(in.values.data() + y * w, w);
    for (int ky = 0; ky < k.side(); ++ky)
      for (int kx = 0; kx < k.side(); ++kx) {
        double* dst = padded.values.data() + static_cast<std::size_t>(y + ky) * padded.width + kx;
        simd::axpy(k.at(kx, ky), src, std::span<double>(dst, w));
      }
  }
  // Fold the padding back onto the samples it mirrors.
  Plane out(in.width, in.height);
  for (int y = 0; y < padded.height; ++y)
    for (int x = 0; x < padded.width; ++x)
      out(mirror_index(x - r, in.width), mirror_index(y - r, in.height)) += padded(x, y);
  return out;
}

RasterImage convolve(const RasterImage& img, const BlurKernel& k) {
  RasterImage out(img.width(), img.height(), img.channels());
  for (int c = 0; c < img.channels(); ++c) out.set_channel(c, correlate(img.channel_plane(c), k));
  return out;
}

BayerMosaic mosaic(const RasterImage& img, CfaLayout layout) {
  if (img.channels() != 3) throw ArgumentError("mosaic expects a 3-channel image");
  if (img.width() % 2 != 0 || img.height() % 2 != 0)
    throw ArgumentError("mosaic expects even width and height");
  RasterImage m(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) m.at(x, y) = img.at(x, y, cfa_color(layout, x, y));
  return BayerMosaic(std::move(m), layout);
}

}  // namespace adaptune
