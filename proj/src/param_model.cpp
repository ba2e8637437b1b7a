#include "adaptune/param_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace adaptune {

CoefficientBlock::CoefficientBlock(int features)
    : theta1(features, 0.0), theta2(static_cast<std::size_t>(features) * (features + 1) / 2, 0.0) {}

std::string_view to_string(ProcessorKind k) {
  switch (k) {
    case ProcessorKind::anlm: return "anlm";
    case ProcessorKind::blend: return "blend";
    case ProcessorKind::tv: return "tv";
  }
  return "anlm";
}

ProcessorKind parse_processor(std::string_view s) {
  if (s == "anlm") return ProcessorKind::anlm;
  if (s == "blend") return ProcessorKind::blend;
  if (s == "tv") return ProcessorKind::tv;
  throw ArgumentError("unknown processor '" + std::string(s) + "'");
}

void ParamMapperModel::validate() const {
  const int F = features();
  if (params.empty()) throw ArgumentError("model has no parameters");
  if (feature_norm.size() != F) throw ArgumentError("feature normalization length differs from F");
  if (feature_norm.mean[0] != 0.0 || feature_norm.stddev[0] != 1.0)
    throw ArgumentError("slot 0 normalization must be (0, 1)");
  for (const ParamSpec& p : params) {
    if (!(p.p_min < p.p_max)) throw ArgumentError("parameter '" + p.name + "' needs p_min < p_max");
    if (p.block.features() != F || p.block.theta2.size() != CoefficientBlock::packed_size(F) - 1 - F)
      throw ArgumentError("coefficient block of '" + p.name + "' does not match F");
  }
}

ParameterField::ParameterField(int width, int height, int params)
    : width_(width), height_(height), params_(params) {
  if (width <= 0 || height <= 0 || params <= 0) throw ArgumentError("invalid parameter field shape");
  values_.assign(pixel_count() * params, 0.0);
}

ParameterField ParameterField::constant(int width, int height, std::span<const double> values) {
  ParameterField f(width, height, static_cast<int>(values.size()));
  for (std::size_t p = 0; p < f.pixel_count(); ++p)
    for (std::size_t k = 0; k < values.size(); ++k) f.values_[p * values.size() + k] = values[k];
  return f;
}

Plane ParameterField::plane(int k) const {
  Plane p(width_, height_);
  for (std::size_t i = 0; i < pixel_count(); ++i) p.values[i] = at(i, k);
  return p;
}

double eval_h(std::span<const double> f, const CoefficientBlock& block) {
  const int F = block.features();
  if (static_cast<int>(f.size()) != F) throw ArgumentError("feature vector length differs from F");
  double h = block.theta0;
  for (int i = 0; i < F; ++i) h += block.theta1[i] * f[i];
  std::size_t t = 0;
  for (int i = 0; i < F; ++i)
    for (int j = i; j < F; ++j) h += block.theta2[t++] * (f[i] * f[j]);
  return h;
}

double logistic_map(double h, double p_min, double p_max) {
  if (std::isnan(h)) h = 0.0;
  if (h >= 745.0) return p_max;
  if (h <= -745.0) return p_min;
  const double gap = p_max - p_min;
  // Evaluate on the side where exp() cannot overflow.
  double s;
  if (h >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-h));
  } else {
    const double e = std::exp(h);
    s = e / (1.0 + e);
  }
  return std::min(p_max, p_min + gap * s);
}

double invert_logistic(double p, double p_min, double p_max) {
  const double s = (p - p_min) / (p_max - p_min);
  if (!(s > 0.0 && s < 1.0)) throw ArgumentError("logistic inverse needs p strictly inside the bounds");
  return std::log(s / (1.0 - s));
}

double round_to_odd(double raw) {
  // Odd integers are 2k + 1; ties (raw even) fall to 2k - 1.
  const double k = std::ceil((raw - 1.0) / 2.0 - 0.5);
  return 2.0 * k + 1.0;
}

double map_param(std::span<const double> f, int k, const ParamMapperModel& model) {
  const ParamSpec& spec = model.params.at(k);
  double p = logistic_map(eval_h(f, spec.block), spec.p_min, spec.p_max);
  if (spec.discrete == Discreteness::odd_integer) {
    p = round_to_odd(p);
    // Clamp to the odd values inside the bounds.
    const double lo = round_to_odd(spec.p_min) < spec.p_min ? round_to_odd(spec.p_min) + 2.0 : round_to_odd(spec.p_min);
    const double hi = round_to_odd(spec.p_max) > spec.p_max ? round_to_odd(spec.p_max) - 2.0 : round_to_odd(spec.p_max);
    p = std::clamp(p, lo, hi);
  }
  return p;
}

ParameterField map_field(const FeatureMap& fm, const ParamMapperModel& model) {
  if (fm.features() != model.features()) throw ArgumentError("feature map F differs from model F");
  const FeatureMap* src = &fm;
  FeatureMap normalized(1, 1, 1);
  if (!fm.normalized() && model.features() > 1) {
    normalized = normalize_features(fm, model.feature_norm);
    src = &normalized;
  }
  ParameterField field(fm.width(), fm.height(), model.param_count());
  for (std::size_t p = 0; p < fm.pixel_count(); ++p)
    for (int k = 0; k < model.param_count(); ++k) field.at(p, k) = map_param(src->at(p), k, model);
  return field;
}

std::size_t packed_size(const ParamMapperModel& model) {
  return model.params.size() * CoefficientBlock::packed_size(model.features());
}

std::vector<double> pack(const ParamMapperModel& model) {
  std::vector<double> v;
  v.reserve(packed_size(model));
  for (const ParamSpec& p : model.params) {
    v.push_back(p.block.theta0);
    v.insert(v.end(), p.block.theta1.begin(), p.block.theta1.end());
    v.insert(v.end(), p.block.theta2.begin(), p.block.theta2.end());
  }
  return v;
}

ParamMapperModel unpack(std::span<const double> packed, const ParamMapperModel& templ) {
  if (packed.size() != packed_size(templ)) throw ArgumentError("packed vector length mismatch");
  ParamMapperModel m = templ;
  const int F = templ.features();
  std::size_t i = 0;
  for (ParamSpec& p : m.params) {
    p.block = CoefficientBlock(F);
    p.block.theta0 = packed[i++];
    for (double& t : p.block.theta1) t = packed[i++];
    for (double& t : p.block.theta2) t = packed[i++];
  }
  return m;
}

FeatureMap normalize_features(const FeatureMap& fm, const FeatureNorm& stats) {
  if (stats.size() != fm.features()) throw ArgumentError("normalization length differs from F");
  FeatureMap out = fm;
  for (std::size_t p = 0; p < fm.pixel_count(); ++p) {
    auto v = out.at(p);
    for (int i = 1; i < fm.features(); ++i) v[i] = (v[i] - stats.mean[i]) / std::max(stats.stddev[i], 1e-9);
  }
  out.set_normalization(stats);
  return out;
}

FeatureNorm compute_feature_norm(std::span<const FeatureMap> maps) {
  if (maps.empty()) throw ArgumentError("no feature maps to normalize");
  const int F = maps[0].features();
  FeatureNorm n = FeatureNorm::identity(F);
  double count = 0.0;
  std::vector<double> sum(F, 0.0);
  for (const FeatureMap& m : maps) {
    if (m.features() != F) throw ArgumentError("feature maps disagree on F");
    for (std::size_t p = 0; p < m.pixel_count(); ++p)
      for (int i = 1; i < F; ++i) sum[i] += m.at(p)[i];
    count += static_cast<double>(m.pixel_count());
  }
  for (int i = 1; i < F; ++i) n.mean[i] = sum[i] / count;
  std::vector<double> sq(F, 0.0);
  for (const FeatureMap& m : maps)
    for (std::size_t p = 0; p < m.pixel_count(); ++p)
      for (int i = 1; i < F; ++i) {
        const double d = m.at(p)[i] - n.mean[i];
        sq[i] += d * d;
      }
  for (int i = 1; i < F; ++i) n.stddev[i] = std::sqrt(sq[i] / count);
  return n;
}

ParamMapperModel make_global_model(ProcessorKind processor, std::vector<ParamSpec> specs,
                                   std::span<const double> values) {
  if (values.size() != specs.size()) throw ArgumentError("one value per parameter required");
  ParamMapperModel m;
  m.processor = processor;
  m.feature_norm = FeatureNorm::identity(1);
  m.params = std::move(specs);
  for (std::size_t k = 0; k < m.params.size(); ++k) {
    ParamSpec& p = m.params[k];
    p.block = CoefficientBlock(1);
    p.block.theta0 = invert_logistic(values[k], p.p_min, p.p_max);
  }
  return m;
}

ParamMapperModel embed_global(const ParamMapperModel& global, const FeatureSpec& spec,
                              const FeatureNorm& norm) {
  if (global.features() != 1) throw ArgumentError("warm start must be an F = 1 model");
  const int F = spec.size();
  if (norm.size() != F) throw ArgumentError("normalization length differs from F");
  ParamMapperModel m = global;
  m.feature_spec = spec;
  m.feature_norm = norm;
  for (ParamSpec& p : m.params) {
    CoefficientBlock b(F);
    b.theta0 = p.block.theta0;
    b.theta1[0] = p.block.theta1[0];
    b.theta2[0] = p.block.theta2[0];
    p.block = std::move(b);
  }
  return m;
}

// ------------------------------------------------------------------ JSON

nlohmann::json to_json(const FeatureSpec& spec) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& d : spec.descriptors)
    arr.push_back({{"kind", std::string(to_string(d.kind))},
                   {"window", d.window},
                   {"source", std::string(to_string(d.source))},
                   {"bins", d.bins}});
  return arr;
}

FeatureSpec feature_spec_from_json(const nlohmann::json& j) {
  FeatureSpec spec;
  for (const auto& d : j)
    spec.descriptors.push_back({parse_descriptor_kind(d.at("kind").get<std::string>()),
                                d.at("window").get<int>(),
                                parse_feature_source(d.value("source", std::string("luminance"))),
                                d.value("bins", kDefaultBins)});
  spec.validate();
  return spec;
}

nlohmann::json to_json(const ParamMapperModel& model) {
  nlohmann::json params = nlohmann::json::array();
  for (const ParamSpec& p : model.params)
    params.push_back({{"name", p.name},
                      {"p_min", p.p_min},
                      {"p_max", p.p_max},
                      {"discrete", p.discrete == Discreteness::odd_integer ? "odd-integer" : "none"},
                      {"theta0", p.block.theta0},
                      {"theta1", p.block.theta1},
                      {"theta2", p.block.theta2}});
  nlohmann::json norm = nlohmann::json::array();
  for (int i = 0; i < model.feature_norm.size(); ++i)
    norm.push_back({model.feature_norm.mean[i], model.feature_norm.stddev[i]});
  return {{"version", model.version},
          {"processor", std::string(to_string(model.processor))},
          {"F", model.features()},
          {"P", model.param_count()},
          {"feature_spec", to_json(model.feature_spec)},
          {"feature_norm", norm},
          {"params", params},
          {"processor_config", model.processor_config}};
}

ParamMapperModel model_from_json(const nlohmann::json& j) {
  try {
    ParamMapperModel m;
    m.version = j.at("version").get<int>();
    if (m.version != kModelFormatVersion) throw ArgumentError("unsupported model format version");
    m.processor = parse_processor(j.at("processor").get<std::string>());
    m.feature_spec = feature_spec_from_json(j.at("feature_spec"));
    const int F = j.at("F").get<int>();
    if (F != m.features()) throw ArgumentError("F disagrees with feature_spec");
    m.feature_norm = FeatureNorm{};
    for (const auto& pair : j.at("feature_norm")) {
      m.feature_norm.mean.push_back(pair.at(0).get<double>());
      m.feature_norm.stddev.push_back(pair.at(1).get<double>());
    }
    for (const auto& pj : j.at("params")) {
      ParamSpec p;
      p.name = pj.value("name", std::string());
      p.p_min = pj.at("p_min").get<double>();
      p.p_max = pj.at("p_max").get<double>();
      const auto disc = pj.value("discrete", std::string("none"));
      if (disc != "none" && disc != "odd-integer") throw ArgumentError("unknown discreteness '" + disc + "'");
      p.discrete = disc == "odd-integer" ? Discreteness::odd_integer : Discreteness::none;
      p.block.theta0 = pj.at("theta0").get<double>();
      p.block.theta1 = pj.at("theta1").get<std::vector<double>>();
      p.block.theta2 = pj.at("theta2").get<std::vector<double>>();
      m.params.push_back(std::move(p));
    }
    if (j.at("P").get<int>() != m.param_count()) throw ArgumentError("P disagrees with params");
    if (j.contains("processor_config")) m.processor_config = j.at("processor_config");
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const ParamMapperModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model '" + path.string() + "'");
  // nlohmann serializes doubles with round-trip (17 significant digit) precision.
  out << to_json(model).dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

ParamMapperModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError("cannot parse model '" + path.string() + "': " + e.what());
  }
  return model_from_json(j);
}

}  // namespace adaptune
