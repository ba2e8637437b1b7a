#pragma once
// Training harness: degraded/reference pairs, the cost closure over packed
// coefficients, global then adaptive Nelder-Mead, and metric reports.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "adaptune/anlm.hpp"
#include "adaptune/deblur.hpp"
#include "adaptune/demosaic.hpp"
#include "adaptune/features.hpp"
#include "adaptune/image.hpp"
#include "adaptune/metrics.hpp"
#include "adaptune/param_model.hpp"
#include "adaptune/simplex.hpp"

namespace adaptune {

struct Degradation {
  /// Gaussian noise std on the 0..255 scale (denoising).
  double sigma_255 = 20.0;
  /// Mosaic layout (demosaicing).
  CfaLayout layout = CfaLayout::RGGB;
  /// Blur and photon budget (deblurring).
  BlurKernel kernel = BlurKernel::identity();
  double photon_max = 1024.0;
};

struct CropSpec {
  int side = 128;
  int count = 4;
  std::uint64_t seed = 0;
};

struct TrainingRun {
  ProcessorKind processor = ProcessorKind::anlm;
  Metric metric = Metric::psnr;
  std::vector<std::filesystem::path> dataset;
  std::vector<int> train;
  std::vector<int> test;
  Degradation degradation;
  FeatureSpec feature_spec;
  std::vector<ParamSpec> bounds;
  std::optional<CropSpec> crop;
  SimplexOptions global_simplex;
  SimplexOptions adaptive_simplex;
  std::uint64_t seed = 0;
  AnlmConfig anlm;
  DeblurConfig deblur;
  std::vector<DemosaicerId> demosaicers = default_demosaicers();

  /// Protocol defaults for a processor: sigma 20, RGGB, 7x7 Gaussian blur
  /// with std 2 and 1024 photons; the processor's feature set and bounds.
  static TrainingRun defaults(ProcessorKind processor);
  void validate() const;
};

nlohmann::json to_json(const TrainingRun& run);
/// Relative dataset paths are resolved against `base_dir`.
TrainingRun training_run_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
TrainingRun load_training_run(const std::filesystem::path& path);

struct TrainingPair {
  std::string name;
  std::uint64_t seed = 0;
  /// Degraded image; for demosaicing the single-channel mosaic plane.
  RasterImage input;
  std::optional<BayerMosaic> mosaic;
  RasterImage reference;
};

/// Degrades the listed dataset images with seed ^ index, then takes the
/// same crops (even offsets) from input and reference.
std::vector<TrainingPair> make_pairs(const TrainingRun& run, std::span<const int> indices);
TrainingPair degrade(const TrainingRun& run, const RasterImage& reference, std::uint64_t seed, std::string name);

/// Processor settings stored in models trained by `run`.
nlohmann::json processor_config(const TrainingRun& run);
AnlmConfig anlm_config_of(const ParamMapperModel& model);
DeblurConfig deblur_config_of(const ParamMapperModel& model);
std::vector<DemosaicerId> demosaicers_of(const ParamMapperModel& model);
CfaLayout cfa_of(const ParamMapperModel& model);

/// F = 1 model at the processor defaults (ANLM 5 / 0.40, uniform blend,
/// mid-range TV weight).
ParamMapperModel baseline_model(const TrainingRun& run);
/// Baseline embedded in the run's feature set (identity statistics); used
/// to prepare pairs for both training stages.
ParamMapperModel feature_template(const TrainingRun& run);

/// A pair plus everything that does not depend on the coefficients: raw
/// feature maps (pre-denoised for ANLM) and demosaicer outputs.
struct PreparedPair {
  TrainingPair pair;
  FeatureSpec spec;
  std::optional<FeatureMap> features;
  std::vector<RasterImage> candidates;
};

/// Uses the processor settings and feature set of `templ`.
PreparedPair prepare_pair(TrainingPair pair, const ParamMapperModel& templ);
std::vector<PreparedPair> prepare_pairs(std::vector<TrainingPair> pairs, const ParamMapperModel& templ);

/// Parameter field the model produces for a prepared pair.
ParameterField model_field(const ParamMapperModel& model, const PreparedPair& pp);
RasterImage run_model(const ParamMapperModel& model, const PreparedPair& pp);

/// Mean metric over the pairs; kPenalty if any output is non-finite.
double model_score(const ParamMapperModel& model, std::span<const PreparedPair> pairs, Metric metric);

/// theta -> mean metric of the unpacked model over the pairs.
Objective make_objective(const ParamMapperModel& templ, std::span<const PreparedPair> pairs, Metric metric);

struct TrainingOutcome {
  ParamMapperModel model;
  OptResult optimization;
  double start_value = 0.0;
};

/// F = 1 search started at the baseline model.
TrainingOutcome train_global(const TrainingRun& run, std::span<const PreparedPair> pairs);
/// F > 1 search started at the exact embedding of `warm`; feature
/// statistics are pooled over `pairs` and frozen into the model.
TrainingOutcome train_adaptive(const TrainingRun& run, std::span<const PreparedPair> pairs,
                               const ParamMapperModel& warm);
/// Embedding template used by train_adaptive.
ParamMapperModel adaptive_template(const TrainingRun& run, std::span<const PreparedPair> pairs,
                                   const ParamMapperModel& warm);

struct ReportEntry {
  std::string split;
  std::string image;
  std::string variant;
  double psnr = 0.0;
  double ssim = 0.0;
  double ms_ssim = 0.0;

  double value(Metric m) const;
};

struct TrainingReport {
  std::vector<std::string> splits;
  std::vector<std::string> variants;
  std::vector<ReportEntry> entries;
  std::vector<std::pair<std::string, double>> global_params;
  int global_evaluations = 0;
  int adaptive_evaluations = 0;

  double mean(const std::string& split, const std::string& variant, Metric m) const;
  std::string text_table() const;
  std::string csv() const;
};

struct NamedModel {
  std::string name;
  ParamMapperModel model;
};

struct EvalSet {
  std::string name;
  std::vector<PreparedPair> pairs;
};

/// Rows: the degraded input (individual demosaicers for blending), then
/// every model, on every set.
TrainingReport evaluate(std::span<const NamedModel> models, std::span<const EvalSet> sets);

}  // namespace adaptune
