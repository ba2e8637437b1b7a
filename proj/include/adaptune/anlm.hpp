#pragma once
// Approximate non-local means: every reference patch is replaced by the
// weighted mean of its N nearest patches inside a square search window,
//
//   q = sum_j w_j r_j / sum_j w_j,
//   w_j = exp(-max(d2_j / (p0^2 * C) - 2 sigma^2, 0) / (p1 sigma)^2),
//
// with per-pixel patch side p0 and filtering parameter p1. Patches overhanging
// the border read mirrored samples; candidate centres stay inside the image.

#include <span>
#include <string_view>
#include <vector>

#include "adaptune/image.hpp"
#include "adaptune/param_model.hpp"

namespace adaptune {

enum class Aggregation { center_pixel, patch_accumulate };
std::string_view to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view s);

struct AnlmConfig {
  int neighbors = 16;
  int search_radius = 10;
  /// Noise std in [0,1] units.
  double sigma = 20.0 / 255.0;
  Aggregation aggregation = Aggregation::patch_accumulate;

  void validate(int width, int height) const;
  friend bool operator==(const AnlmConfig&, const AnlmConfig&) = default;
};

nlohmann::json to_json(const AnlmConfig& cfg);
AnlmConfig anlm_config_from_json(const nlohmann::json& j);

struct PatchMatch {
  int dx = 0;
  int dy = 0;
  /// Squared l2 distance summed over all patch samples and channels.
  double d2 = 0.0;

  friend bool operator==(const PatchMatch&, const PatchMatch&) = default;
};

/// The N smallest-distance candidates around (x, y) for a `patch`-sided
/// patch, self included; ties go to the earlier offset in raster order
/// (dy major, dx minor). Sorted by (d2, raster order).
std::vector<PatchMatch> find_neighbors(const RasterImage& guide, int x, int y, int patch,
                                       const AnlmConfig& cfg);

/// Neighbour lists for every pixel at once (same contract as
/// find_neighbors), computed with per-offset integral images.
struct NeighborTable {
  int width = 0;
  int height = 0;
  int neighbors = 0;
  std::vector<PatchMatch> matches;  // pixel-major, `neighbors` entries each

  std::span<const PatchMatch> at(std::size_t pixel) const {
    return {matches.data() + pixel * neighbors, static_cast<std::size_t>(neighbors)};
  }
};
NeighborTable compute_neighbor_table(const RasterImage& guide, std::span<const int> patch_sides,
                                     const AnlmConfig& cfg);

double anlm_weight(double d2, int p0, double p1, double sigma, int channels);

/// Filters `values` with neighbours and weights taken from `guide`.
/// Per-pixel patch sides must be odd; p1 per pixel. No clamping.
std::vector<Plane> nlm_filter(const RasterImage& guide, std::span<const Plane> values,
                              std::span<const int> patch_sides, std::span<const double> p1,
                              const AnlmConfig& cfg);

/// field slot 0 = patch side p0 (odd), slot 1 = filtering parameter p1.
/// Output clamped to [0,1].
RasterImage denoise(const RasterImage& img, const ParameterField& field, const AnlmConfig& cfg);
RasterImage denoise_global(const RasterImage& img, int p0, double p1, const AnlmConfig& cfg);
/// Features from `img`, pre-denoised with non-adaptive NLM, mapped through
/// the model.
RasterImage denoise_adaptive(const RasterImage& img, const ParamMapperModel& model, const AnlmConfig& cfg);

/// Default parameter bounds: p0 in [3, 21] odd, p1 in [0.05, 1.5].
std::vector<ParamSpec> anlm_param_specs();

}  // namespace adaptune
