#pragma once
// Full-reference quality metrics on [0,1] images. All are higher-is-better
// and symmetric in their arguments. Color images are scored per channel and
// averaged.

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "adaptune/image.hpp"

namespace adaptune {

enum class Metric { psnr, ssim, ms_ssim };
std::string_view to_string(Metric m);
Metric parse_metric(std::string_view s);

inline constexpr double kPsnrCap = 99.0;

double mse(const RasterImage& a, const RasterImage& b);
/// 10 log10(1 / mse), capped at 99 dB (identical images report the cap).
double psnr(const RasterImage& a, const RasterImage& b);
/// Gaussian-window SSIM (11x11, sigma 1.5, K1 0.01, K2 0.03, L 1), averaged
/// over the valid (unpadded) window positions.
double ssim(const RasterImage& a, const RasterImage& b);
/// Scales used by ms_ssim for a given smaller image side (1..5).
int ms_ssim_scales(int min_side);
/// Multi-scale SSIM with 2x2 mean-pool downsampling. Scales are dropped until
/// the coarsest one still fits the 11x11 window; exponents are renormalized.
/// Negative contrast-structure terms are clamped to 0.
double ms_ssim(const RasterImage& a, const RasterImage& b);

double evaluate_metric(Metric m, const RasterImage& a, const RasterImage& b);

struct ImagePairRef {
  const RasterImage* processed;
  const RasterImage* reference;
};

/// Arithmetic mean of the metric, summed in list order.
double mean_cost(Metric m, std::span<const ImagePairRef> pairs);

}  // namespace adaptune
