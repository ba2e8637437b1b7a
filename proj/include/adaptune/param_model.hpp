#pragma once
// Quadratic-logistic mapping from feature vectors to bounded per-pixel
// processing parameters:
//
//   h(f)  = theta0 + sum_i theta1[i] f_i + sum_{i<=j} theta2[i,j] f_i f_j
//   p(f)  = p_min + (p_max - p_min) / (1 + exp(-h(f)))
//
// theta2 is stored as the upper triangle (diagonal included), row-major.

#include <filesystem>
#include "json.hpp"
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaptune/features.hpp"

namespace adaptune {

inline constexpr int kModelFormatVersion = 1;

struct CoefficientBlock {
  double theta0 = 0.0;
  std::vector<double> theta1;
  std::vector<double> theta2;

  CoefficientBlock() = default;
  explicit CoefficientBlock(int features);

  int features() const { return static_cast<int>(theta1.size()); }
  static std::size_t packed_size(int features) {
    const auto f = static_cast<std::size_t>(features);
    return 1 + f + f * (f + 1) / 2;
  }
  /// Index of (i, j), i <= j, inside theta2.
  static std::size_t tri_index(int features, int i, int j) {
    return static_cast<std::size_t>(i) * features - static_cast<std::size_t>(i) * (i - 1) / 2 + (j - i);
  }

  friend bool operator==(const CoefficientBlock&, const CoefficientBlock&) = default;
};

enum class Discreteness { none, odd_integer };

struct ParamSpec {
  std::string name;
  double p_min = 0.0;
  double p_max = 1.0;
  Discreteness discrete = Discreteness::none;
  CoefficientBlock block;

  friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

enum class ProcessorKind { anlm, blend, tv };
std::string_view to_string(ProcessorKind k);
ProcessorKind parse_processor(std::string_view s);

struct ParamMapperModel {
  int version = kModelFormatVersion;
  ProcessorKind processor = ProcessorKind::anlm;
  FeatureSpec feature_spec;
  FeatureNorm feature_norm;
  std::vector<ParamSpec> params;
  /// Processor settings that travel with the model (neighbour count, solver
  /// budget, demosaicer list, ...). Interpreted by the processor modules.
  nlohmann::json processor_config = nlohmann::json::object();

  int features() const { return feature_spec.size(); }
  int param_count() const { return static_cast<int>(params.size()); }
  /// Throws ArgumentError when shapes or bounds are inconsistent.
  void validate() const;

  friend bool operator==(const ParamMapperModel&, const ParamMapperModel&) = default;
};

/// Per-pixel parameter vectors, pixel-major.
class ParameterField {
 public:
  ParameterField(int width, int height, int params);
  static ParameterField constant(int width, int height, std::span<const double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  int params() const { return params_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  double at(std::size_t pixel, int k) const { return values_[pixel * params_ + k]; }
  double at(int x, int y, int k) const { return at(static_cast<std::size_t>(y) * width_ + x, k); }
  double& at(std::size_t pixel, int k) { return values_[pixel * params_ + k]; }
  Plane plane(int k) const;

  friend bool operator==(const ParameterField&, const ParameterField&) = default;

 private:
  int width_;
  int height_;
  int params_;
  std::vector<double> values_;
};

double eval_h(std::span<const double> f, const CoefficientBlock& block);
/// Saturating logistic into [p_min, p_max].
double logistic_map(double h, double p_min, double p_max);
/// h such that logistic_map(h) == p, for p strictly inside the bounds.
double invert_logistic(double p, double p_min, double p_max);
/// Nearest odd integer; exact ties go to the smaller odd value.
double round_to_odd(double raw);

/// `f` must already be normalized with the model's statistics.
double map_param(std::span<const double> f, int k, const ParamMapperModel& model);
/// Normalizes raw maps with model.feature_norm first.
ParameterField map_field(const FeatureMap& fm, const ParamMapperModel& model);

std::size_t packed_size(const ParamMapperModel& model);
std::vector<double> pack(const ParamMapperModel& model);
ParamMapperModel unpack(std::span<const double> packed, const ParamMapperModel& templ);

FeatureMap normalize_features(const FeatureMap& fm, const FeatureNorm& stats);
/// Pooled mean / population std of each raw feature over all maps.
FeatureNorm compute_feature_norm(std::span<const FeatureMap> maps);

/// F = 1 model whose coefficients put every parameter at `values`
/// (theta0 = logistic inverse, all other coefficients zero).
ParamMapperModel make_global_model(ProcessorKind processor, std::vector<ParamSpec> specs,
                                   std::span<const double> values);
/// Embeds an F = 1 model into a wider feature space so that the result maps
/// every feature vector to the global model's parameters.
ParamMapperModel embed_global(const ParamMapperModel& global, const FeatureSpec& spec,
                              const FeatureNorm& norm);

/// JSON model document (17 significant digits, lossless).
nlohmann::json to_json(const ParamMapperModel& model);
ParamMapperModel model_from_json(const nlohmann::json& j);
void save_model(const ParamMapperModel& model, const std::filesystem::path& path);
ParamMapperModel load_model(const std::filesystem::path& path);

nlohmann::json to_json(const FeatureSpec& spec);
FeatureSpec feature_spec_from_json(const nlohmann::json& j);

}  // namespace adaptune
