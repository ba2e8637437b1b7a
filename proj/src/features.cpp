#include "adaptune/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "adaptune/anlm.hpp"
#include "adaptune/synthesis.hpp"

namespace adaptune {

std::string_view to_string(DescriptorKind k) {
  switch (k) {
    case DescriptorKind::variance: return "variance";
    case DescriptorKind::entropy: return "entropy";
    case DescriptorKind::gradient_entropy: return "gradient-entropy";
    case DescriptorKind::mean: return "mean";
    case DescriptorKind::std_dev: return "std";
    case DescriptorKind::mean_std_ratio: return "mean-std-ratio";
  }
  return "variance";
}

std::string_view to_string(FeatureSource s) {
  switch (s) {
    case FeatureSource::luminance: return "luminance";
    case FeatureSource::bayer_r: return "bayer-R";
    case FeatureSource::bayer_g: return "bayer-G";
    case FeatureSource::bayer_b: return "bayer-B";
  }
  return "luminance";
}

DescriptorKind parse_descriptor_kind(std::string_view s) {
  for (auto k : {DescriptorKind::variance, DescriptorKind::entropy, DescriptorKind::gradient_entropy,
                 DescriptorKind::mean, DescriptorKind::std_dev, DescriptorKind::mean_std_ratio})
    if (to_string(k) == s) return k;
  throw ArgumentError("unknown descriptor kind '" + std::string(s) + "'");
}

FeatureSource parse_feature_source(std::string_view s) {
  for (auto k : {FeatureSource::luminance, FeatureSource::bayer_r, FeatureSource::bayer_g,
                 FeatureSource::bayer_b})
    if (to_string(k) == s) return k;
  throw ArgumentError("unknown feature source '" + std::string(s) + "'");
}

bool FeatureSpec::uses_bayer() const {
  return std::any_of(descriptors.begin(), descriptors.end(),
                     [](const Descriptor& d) { return d.source != FeatureSource::luminance; });
}

int FeatureSpec::largest_window() const {
  int w = 1;
  for (const auto& d : descriptors) w = std::max(w, d.window);
  return w;
}

void FeatureSpec::validate() const {
  for (const auto& d : descriptors) {
    if (d.window < 3 || d.window % 2 == 0) throw ArgumentError("feature windows must be odd and >= 3");
    if (d.bins < 2) throw ArgumentError("histogram needs at least 2 bins");
  }
}

FeatureSpec FeatureSpec::denoising() {
  using K = DescriptorKind;
  constexpr auto L = FeatureSource::luminance;
  return {{{K::variance, 3, L}, {K::variance, 5, L}, {K::entropy, 3, L}, {K::entropy, 7, L},
           {K::gradient_entropy, 3, L}, {K::gradient_entropy, 7, L}}};
}

FeatureSpec FeatureSpec::demosaicing() {
  FeatureSpec spec;
  for (auto src : {FeatureSource::bayer_r, FeatureSource::bayer_g, FeatureSource::bayer_b})
    for (auto kind : {DescriptorKind::variance, DescriptorKind::entropy, DescriptorKind::gradient_entropy})
      spec.descriptors.push_back({kind, 7, src});
  return spec;
}

FeatureSpec FeatureSpec::deblurring() {
  FeatureSpec spec;
  for (int w : {5, 9})
    for (auto kind : {DescriptorKind::mean, DescriptorKind::std_dev, DescriptorKind::mean_std_ratio})
      spec.descriptors.push_back({kind, w, FeatureSource::luminance});
  return spec;
}

FeatureNorm FeatureNorm::identity(int features) {
  return {std::vector<double>(features, 0.0), std::vector<double>(features, 1.0)};
}

FeatureMap::FeatureMap(int width, int height, int features)
    : width_(width), height_(height), features_(features) {
  if (features < 1) throw ArgumentError("feature map needs F >= 1");
  values_.assign(pixel_count() * features, 0.0);
  for (std::size_t p = 0; p < pixel_count(); ++p) values_[p * features] = 1.0;
}

Plane FeatureMap::plane(int k) const {
  Plane p(width_, height_);
  for (std::size_t i = 0; i < pixel_count(); ++i) p.values[i] = values_[i * features_ + k];
  return p;
}

void FeatureMap::set_plane(int k, const Plane& p) {
  if (k < 1 || k >= features_) throw ArgumentError("feature slot out of range");
  if (p.width != width_ || p.height != height_) throw ArgumentError("feature plane shape mismatch");
  for (std::size_t i = 0; i < pixel_count(); ++i) values_[i * features_ + k] = p.values[i];
}

namespace {

// Window samples around (x, y), mirror padded; with a CFA mask only sites of
// `color` contribute.
struct WindowGather {
  const Plane& source;
  int window;
  const BayerMosaic* cfa = nullptr;
  int color = -1;

  void collect(int x, int y, std::vector<double>& out) const {
    out.clear();
    const int r = window / 2;
    for (int v = -r; v <= r; ++v)
      for (int u = -r; u <= r; ++u) {
        const int sx = mirror_index(x + u, source.width), sy = mirror_index(y + v, source.height);
        if (cfa && cfa->color(sx, sy) != color) continue;
        out.push_back(source(sx, sy));
      }
  }
};

double sample_mean(const std::vector<double>& s) {
  double acc = 0.0;
  for (double v : s) acc += v;
  return acc / static_cast<double>(s.size());
}

double sample_variance(const std::vector<double>& s) {
  const double m = sample_mean(s);
  double acc = 0.0;
  for (double v : s) acc += (v - m) * (v - m);
  return acc / static_cast<double>(s.size());
}

double histogram_entropy(const std::vector<double>& s, int bins, double range, std::vector<int>& hist) {
  hist.assign(bins, 0);
  for (double v : s) {
    const double t = std::clamp(v, 0.0, range) / range;
    hist[std::min(bins - 1, static_cast<int>(t * bins))]++;
  }
  const double n = static_cast<double>(s.size());
  double e = 0.0;
  for (int c : hist)
    if (c > 0) {
      const double p = c / n;
      e -= p * std::log2(p);
    }
  return e;
}

double reduce(DescriptorKind kind, const std::vector<double>& s, int bins, std::vector<int>& hist) {
  switch (kind) {
    case DescriptorKind::mean: return sample_mean(s);
    case DescriptorKind::variance: return sample_variance(s);
    case DescriptorKind::std_dev: return std::sqrt(sample_variance(s));
    case DescriptorKind::mean_std_ratio: return std::sqrt(sample_variance(s)) / (sample_mean(s) + kRatioEpsilon);
    case DescriptorKind::entropy: return histogram_entropy(s, bins, 1.0, hist);
    case DescriptorKind::gradient_entropy: return histogram_entropy(s, bins, std::numbers::sqrt2, hist);
  }
  return 0.0;
}

Plane descriptor_plane(const WindowGather& gather, DescriptorKind kind, int bins) {
  if (gather.window < 1 || gather.window % 2 == 0) throw ArgumentError("window must be odd");
  Plane out(gather.source.width, gather.source.height);
  std::vector<double> samples;
  std::vector<int> hist;
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      gather.collect(x, y, samples);
      out(x, y) = reduce(kind, samples, bins, hist);
    }
  return out;
}

void check_bins(int bins) {
  if (bins < 2) throw ArgumentError("histogram needs at least 2 bins");
}

}  // namespace

Plane local_mean(const Plane& img, int window) {
  return descriptor_plane({img, window}, DescriptorKind::mean, kDefaultBins);
}
Plane local_variance(const Plane& img, int window) {
  return descriptor_plane({img, window}, DescriptorKind::variance, kDefaultBins);
}
Plane local_std(const Plane& img, int window) {
  return descriptor_plane({img, window}, DescriptorKind::std_dev, kDefaultBins);
}
Plane mean_std_ratio(const Plane& img, int window) {
  return descriptor_plane({img, window}, DescriptorKind::mean_std_ratio, kDefaultBins);
}
Plane local_entropy(const Plane& img, int window, int bins) {
  check_bins(bins);
  return descriptor_plane({img, window}, DescriptorKind::entropy, bins);
}

Plane gradient_magnitude(const Plane& img, int step) {
  Plane g(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double gx = img.mirrored(x + step, y) - img.mirrored(x - step, y);
      const double gy = img.mirrored(x, y + step) - img.mirrored(x, y - step);
      g(x, y) = std::min(std::sqrt(gx * gx + gy * gy), std::numbers::sqrt2);
    }
  return g;
}

Plane local_gradient_entropy(const Plane& img, int window, int bins) {
  check_bins(bins);
  const Plane g = gradient_magnitude(img, 1);
  return descriptor_plane({g, window}, DescriptorKind::gradient_entropy, bins);
}

FeatureMap build_feature_map(const RasterImage& img, const FeatureSpec& spec) {
  spec.validate();
  if (spec.uses_bayer()) throw ArgumentError("Bayer feature sources need a BayerMosaic input");
  FeatureMap fm(img.width(), img.height(), spec.size());
  if (spec.descriptors.empty()) return fm;
  const Plane luma = to_grayscale(img).channel_plane(0);
  Plane grad;
  for (std::size_t k = 0; k < spec.descriptors.size(); ++k) {
    const Descriptor& d = spec.descriptors[k];
    if (d.kind == DescriptorKind::gradient_entropy) {
      if (grad.values.empty()) grad = gradient_magnitude(luma, 1);
      fm.set_plane(static_cast<int>(k) + 1, descriptor_plane({grad, d.window}, d.kind, d.bins));
    } else {
      fm.set_plane(static_cast<int>(k) + 1, descriptor_plane({luma, d.window}, d.kind, d.bins));
    }
  }
  return fm;
}

FeatureMap build_feature_map(const BayerMosaic& mosaic, const FeatureSpec& spec) {
  spec.validate();
  FeatureMap fm(mosaic.width(), mosaic.height(), spec.size());
  const Plane raw = mosaic.image().channel_plane(0);
  Plane grad_luma, grad_cfa;
  for (std::size_t k = 0; k < spec.descriptors.size(); ++k) {
    const Descriptor& d = spec.descriptors[k];
    const bool bayer = d.source != FeatureSource::luminance;
    const Plane* src = &raw;
    if (d.kind == DescriptorKind::gradient_entropy) {
      // Same-colour neighbours sit two sites away in every Bayer layout.
      Plane& g = bayer ? grad_cfa : grad_luma;
      if (g.values.empty()) g = gradient_magnitude(raw, bayer ? 2 : 1);
      src = &g;
    }
    WindowGather gather{*src, d.window};
    if (bayer) {
      gather.cfa = &mosaic;
      gather.color = static_cast<int>(d.source) - static_cast<int>(FeatureSource::bayer_r);
    }
    fm.set_plane(static_cast<int>(k) + 1, descriptor_plane(gather, d.kind, d.bins));
  }
  return fm;
}

FeatureMap denoise_feature_map(const FeatureMap& fm, const RasterImage& guide, double sigma) {
  AnlmConfig cfg;
  cfg.sigma = sigma;
  return denoise_feature_map(fm, guide, sigma, cfg);
}

FeatureMap denoise_feature_map(const FeatureMap& fm, const RasterImage& guide, double sigma,
                               const AnlmConfig& cfg_in) {
  if (guide.width() != fm.width() || guide.height() != fm.height())
    throw ArgumentError("guide does not match feature map");
  if (fm.features() == 1) return fm;
  AnlmConfig cfg = cfg_in;
  cfg.sigma = sigma;
  constexpr int kPatch = 9;
  constexpr double kFilter = 0.4;
  std::vector<Plane> planes;
  for (int k = 1; k < fm.features(); ++k) planes.push_back(fm.plane(k));
  const std::vector<int> sides(fm.pixel_count(), kPatch);
  const std::vector<double> p1(fm.pixel_count(), kFilter);
  const auto filtered = nlm_filter(guide, planes, sides, p1, cfg);
  FeatureMap out = fm;
  for (int k = 1; k < fm.features(); ++k) out.set_plane(k, filtered[k - 1]);
  return out;
}

}  // namespace adaptune
