#include "adaptune/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "adaptune/simd/kernels.hpp"

namespace adaptune {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::psnr: return "PSNR";
    case Metric::ssim: return "SSIM";
    case Metric::ms_ssim: return "MS-SSIM";
  }
  return "PSNR";
}

Metric parse_metric(std::string_view s) {
  if (s == "PSNR" || s == "psnr") return Metric::psnr;
  if (s == "SSIM" || s == "ssim") return Metric::ssim;
  if (s == "MS-SSIM" || s == "ms-ssim" || s == "ms_ssim") return Metric::ms_ssim;
  throw ArgumentError("unknown metric '" + std::string(s) + "'");
}

namespace {

void require_same_shape(const RasterImage& a, const RasterImage& b) {
  if (!a.same_shape(b)) throw ArgumentError("metric inputs differ in shape");
}

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr std::array<double, 5> kMsWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

// Normalized 1-D Gaussian; the 2-D window is its outer product.
std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> g{};
  double s = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    g[i] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
    s += g[i];
  }
  for (double& v : g) v /= s;
  return g;
}

// 'valid' separable Gaussian filtering: output (w-10) x (h-10).
Plane filter_valid(const Plane& in) {
  static const auto taps = gaussian_taps();
  const int ow = in.width - kWindow + 1, oh = in.height - kWindow + 1;
  Plane rows(ow, in.height);
  for (int y = 0; y < in.height; ++y) {
    std::span<double> dst(rows.values.data() + static_cast<std::size_t>(y) * ow, ow);
    for (int k = 0; k < kWindow; ++k)
      simd::axpy(taps[k], {in.values.data() + static_cast<std::size_t>(y) * in.width + k, static_cast<std::size_t>(ow)}, dst);
  }
  Plane out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    std::span<double> dst(out.values.data() + static_cast<std::size_t>(y) * ow, ow);
    for (int k = 0; k < kWindow; ++k)
      simd::axpy(taps[k], {rows.values.data() + static_cast<std::size_t>(y + k) * ow, static_cast<std::size_t>(ow)}, dst);
  }
  return out;
}

Plane product(const Plane& a, const Plane& b) {
  Plane p(a.width, a.height);
  simd::multiply(a.values, b.values, p.values);
  return p;
}

struct SsimTerms {
  double ssim;  // mean of l * cs
  double cs;    // mean of cs
};

SsimTerms ssim_terms(const Plane& a, const Plane& b) {
  const Plane mu_a = filter_valid(a), mu_b = filter_valid(b);
  const Plane aa = filter_valid(product(a, a)), bb = filter_valid(product(b, b)),
              ab = filter_valid(product(a, b));
  double s_sum = 0.0, cs_sum = 0.0;
  for (std::size_t i = 0; i < mu_a.values.size(); ++i) {
    const double ma = mu_a.values[i], mb = mu_b.values[i];
    const double va = aa.values[i] - ma * ma, vb = bb.values[i] - mb * mb, cov = ab.values[i] - ma * mb;
    const double cs = (2.0 * cov + kC2) / (va + vb + kC2);
    const double l = (2.0 * ma * mb + kC1) / (ma * ma + mb * mb + kC1);
    s_sum += l * cs;
    cs_sum += cs;
  }
  const double n = static_cast<double>(mu_a.values.size());
  return {s_sum / n, cs_sum / n};
}

Plane downsample(const Plane& p) {
  Plane out(p.width / 2, p.height / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      out(x, y) = 0.25 * (p(2 * x, 2 * y) + p(2 * x + 1, 2 * y) + p(2 * x, 2 * y + 1) + p(2 * x + 1, 2 * y + 1));
  return out;
}

}  // namespace

double mse(const RasterImage& a, const RasterImage& b) {
  require_same_shape(a, b);
  return simd::sum_sq_diff(a.samples(), b.samples()) / static_cast<double>(a.samples().size());
}

double psnr(const RasterImage& a, const RasterImage& b) {
  const double e = mse(a, b);
  if (e <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / e));
}

double ssim(const RasterImage& a, const RasterImage& b) {
  require_same_shape(a, b);
  if (std::min(a.width(), a.height()) < kWindow) throw ArgumentError("SSIM needs images of at least 11x11");
  double acc = 0.0;
  for (int c = 0; c < a.channels(); ++c) acc += ssim_terms(a.channel_plane(c), b.channel_plane(c)).ssim;
  return acc / a.channels();
}

int ms_ssim_scales(int min_side) {
  int scales = 0;
  while (scales < 5 && min_side >= kWindow * (1 << scales)) ++scales;
  return scales;
}

double ms_ssim(const RasterImage& a, const RasterImage& b) {
  require_same_shape(a, b);
  const int scales = ms_ssim_scales(std::min(a.width(), a.height()));
  if (scales == 0) throw ArgumentError("MS-SSIM needs images of at least 11x11");
  double wsum = 0.0;
  for (int s = 0; s < scales; ++s) wsum += kMsWeights[s];
  double acc = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    Plane pa = a.channel_plane(c), pb = b.channel_plane(c);
    double value = 1.0;
    for (int s = 0; s < scales; ++s) {
      const SsimTerms t = ssim_terms(pa, pb);
      const double w = kMsWeights[s] / wsum;
      const double term = s + 1 == scales ? t.ssim : t.cs;
      value *= std::pow(std::max(term, 0.0), w);
      if (s + 1 < scales) {
        pa = downsample(pa);
        pb = downsample(pb);
      }
    }
    acc += value;
  }
  return acc / a.channels();
}

double evaluate_metric(Metric m, const RasterImage& a, const RasterImage& b) {
  switch (m) {
    case Metric::psnr: return psnr(a, b);
    case Metric::ssim: return ssim(a, b);
    case Metric::ms_ssim: return ms_ssim(a, b);
  }
  return 0.0;
}

double mean_cost(Metric m, std::span<const ImagePairRef> pairs) {
  if (pairs.empty()) throw ArgumentError("mean_cost needs at least one pair");
  double acc = 0.0;
  for (const auto& p : pairs) acc += evaluate_metric(m, *p.processed, *p.reference);
  return acc / static_cast<double>(pairs.size());
}

}  // namespace adaptune
