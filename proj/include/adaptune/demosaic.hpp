#pragma once
// Built-in demosaicers and per-pixel convex blending of several
// demosaicers' outputs:  out = sum_k p_k d_k / sum_k p_k.

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "adaptune/image.hpp"
#include "adaptune/param_model.hpp"

namespace adaptune {

enum class DemosaicerId { bilinear, gradient_corrected, edge_directed };
std::string_view to_string(DemosaicerId id);
DemosaicerId parse_demosaicer(std::string_view s);
std::vector<DemosaicerId> default_demosaicers();

/// Every demosaicer keeps the measured CFA samples and clamps the
/// interpolated ones to [0,1].
RasterImage demosaic(const BayerMosaic& m, DemosaicerId id);

/// Weighted mean with weights p_k / sum p_k; where sum p_k < 1e-12 the
/// outputs are averaged uniformly.
RasterImage blend(std::span<const RasterImage> outputs, const ParameterField& field);

/// Features -> parameter field -> blend of the demosaicers' outputs.
/// `outputs` may be supplied (e.g. external demosaicers); otherwise the
/// built-ins listed in the model's processor_config are run.
RasterImage blend_adaptive(const BayerMosaic& m, const ParamMapperModel& model,
                           std::span<const DemosaicerId> ids);
RasterImage blend_adaptive(const BayerMosaic& m, const ParamMapperModel& model,
                           std::span<const RasterImage> outputs);

/// Normalized blending factors as RGB (channel k = p_k / sum p); P <= 3.
RasterImage blend_map_image(const ParameterField& field);
void export_blend_map(const ParameterField& field, const std::filesystem::path& path);

/// P weights in [0, 1].
std::vector<ParamSpec> blend_param_specs(std::size_t count);

}  // namespace adaptune
