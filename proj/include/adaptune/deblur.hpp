#pragma once
// Poisson MAP deblurring with a per-pixel weighted, eps-smoothed TV prior:
//
//   C(o) = sum photon_max [z - i + i ln(i / z)]            z = H o
//        + photon_max * sum p0(x,y) sqrt(gx^2 + gy^2 + eps^2)
//
// Both terms are measured in photon counts, i.e. the TV term is the TV of
// the photon image. Minimized by projected steepest descent.

#include <span>
#include <vector>

#include "json.hpp"
#include "adaptune/image.hpp"
#include "adaptune/param_model.hpp"

namespace adaptune {

struct DeblurConfig {
  BlurKernel kernel = BlurKernel::identity();
  double photon_max = 1024.0;
  int iterations = 300;
  double step = 1.0;
  double tv_epsilon = 1e-4;
  double nonneg_floor = 1e-8;

  void validate() const;
};

nlohmann::json to_json(const DeblurConfig& c);
DeblurConfig deblur_config_from_json(const nlohmann::json& j);

/// Poisson KL between observation i and prediction z (photons). Entries of
/// z below `floor` are raised to it; `clamped` reports whether that happened.
double kl_poisson(const Plane& i, const Plane& z, double photon_max, double floor = 1e-8,
                  bool* clamped = nullptr);
/// Gradient of kl_poisson(i, H o) with respect to o.
Plane kl_gradient(const Plane& i, const Plane& o, const DeblurConfig& cfg);

/// sum sqrt(gx^2 + gy^2 + eps^2), forward differences, mirrored boundary.
double tv_value(const Plane& o, double eps);
Plane tv_gradient(const Plane& o, double eps);
/// Per-pixel weighted variants; `weights` has one entry per pixel.
double tv_value(const Plane& o, double eps, std::span<const double> weights);
Plane tv_gradient(const Plane& o, double eps, std::span<const double> weights);

double cost_value(const Plane& i, const Plane& o, const Plane& field, const DeblurConfig& cfg);

struct DeblurResult {
  RasterImage image;
  /// C at the start and after every accepted step.
  std::vector<double> cost_trace;
  int iterations = 0;
  /// Stopped early because no halving decreased the cost.
  bool stalled = false;
  bool floor_clamped = false;
};

/// `field` is the per-pixel p0; single-channel input in [0,1].
DeblurResult deblur_detailed(const RasterImage& observed, const Plane& field, const DeblurConfig& cfg);
RasterImage deblur(const RasterImage& observed, const Plane& field, const DeblurConfig& cfg);
RasterImage deblur_global(const RasterImage& observed, double p0, const DeblurConfig& cfg);
/// Features are taken from the observed image.
RasterImage deblur_adaptive(const RasterImage& observed, const ParamMapperModel& model, const DeblurConfig& cfg);

/// p0 in [1e-4, 5e-2].
std::vector<ParamSpec> tv_param_specs();

}  // namespace adaptune
