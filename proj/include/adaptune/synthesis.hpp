#pragma once
// Color conversion and the degradations used to build training pairs.
// Every operation is pure: equal inputs and seed give bit-identical output.

#include <cstdint>

#include "adaptune/image.hpp"

namespace adaptune {

/// Rec.601 luma; single-channel input is returned unchanged.
RasterImage to_grayscale(const RasterImage& img);

/// Adds N(0, sigma^2) per sample (Boost ziggurat normal over mt19937_64),
/// then clamps to [0,1].
RasterImage add_gaussian_noise(const RasterImage& img, double sigma, std::uint64_t seed);

/// Replaces s by Poisson(s * photon_max) / photon_max, then clamps to [0,1].
RasterImage add_poisson_noise(const RasterImage& img, double photon_max, std::uint64_t seed);

/// Unit-sum Gaussian sampled at integer offsets.
BlurKernel gaussian_kernel(int side, double sigma);

/// Per-channel correlation with mirror padding; output has the input's shape.
/// No clamping, so the operator is exactly linear.
Plane correlate(const Plane& in, const BlurKernel& k);
RasterImage convolve(const RasterImage& img, const BlurKernel& k);

/// Exact adjoint of `correlate` under mirror padding:
/// <correlate(a), b> == <a, correlate_adjoint(b)>.
Plane correlate_adjoint(const Plane& in, const BlurKernel& k);

/// Samples the layout-designated channel at every site.
BayerMosaic mosaic(const RasterImage& img, CfaLayout layout);

}  // namespace adaptune
