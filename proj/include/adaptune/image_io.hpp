#pragma once

#include <filesystem>

#include "adaptune/image.hpp"

namespace adaptune {

/// Loads PNG or binary PGM/PPM (8 or 16 bit, gray or RGB). Integer codes are
/// divided by the format's maximum code. PNG alpha is dropped and palettes
/// are expanded. Throws IoError naming the path on any failure.
RasterImage load_image(const std::filesystem::path& path);

/// Writes PNG, or PGM/PPM when the extension is .pgm/.ppm/.pnm. Samples are
/// quantized as round(s * (2^bitdepth - 1)) with ties away from zero after
/// clamping to [0,1].
void save_image(const RasterImage& img, const std::filesystem::path& path, int bitdepth = 8);

/// Blur kernel text file: first token the side, then side*side reals.
/// Weights are renormalized to unit sum.
BlurKernel load_kernel(const std::filesystem::path& path);
void save_kernel(const BlurKernel& kernel, const std::filesystem::path& path);

}  // namespace adaptune
