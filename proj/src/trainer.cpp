#include "adaptune/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "adaptune/image_io.hpp"
#include "adaptune/parallel.hpp"
#include "adaptune/synthesis.hpp"

namespace adaptune {

namespace {

std::vector<ParamSpec> default_bounds(ProcessorKind k, std::size_t demosaicers) {
  switch (k) {
    case ProcessorKind::anlm: return anlm_param_specs();
    case ProcessorKind::blend: return blend_param_specs(demosaicers);
    case ProcessorKind::tv: return tv_param_specs();
  }
  return {};
}

FeatureSpec default_features(ProcessorKind k) {
  switch (k) {
    case ProcessorKind::anlm: return FeatureSpec::denoising();
    case ProcessorKind::blend: return FeatureSpec::demosaicing();
    case ProcessorKind::tv: return FeatureSpec::deblurring();
  }
  return {};
}

nlohmann::json kernel_json(const BlurKernel& k) {
  const auto w = k.weights();
  return {{"side", k.side()}, {"weights", std::vector<double>(w.begin(), w.end())}};
}

BlurKernel kernel_from_json(const nlohmann::json& j, const std::filesystem::path& base) {
  if (j.contains("file")) {
    std::filesystem::path p = j.at("file").get<std::string>();
    return load_kernel(p.is_absolute() ? p : base / p);
  }
  if (j.contains("gaussian_sigma"))
    return gaussian_kernel(j.value("side", 7), j.at("gaussian_sigma").get<double>());
  return BlurKernel(j.at("side").get<int>(), j.at("weights").get<std::vector<double>>());
}

}  // namespace

TrainingRun TrainingRun::defaults(ProcessorKind processor) {
  TrainingRun run;
  run.processor = processor;
  run.degradation.kernel = gaussian_kernel(7, 2.0);
  run.feature_spec = default_features(processor);
  run.bounds = default_bounds(processor, run.demosaicers.size());
  run.deblur.kernel = run.degradation.kernel;
  return run;
}

void TrainingRun::validate() const {
  if (dataset.empty()) throw ArgumentError("training run has no dataset");
  if (train.empty()) throw ArgumentError("training split is empty");
  const auto n = static_cast<int>(dataset.size());
  for (int i : train)
    if (i < 0 || i >= n) throw ArgumentError("train index out of range");
  for (int i : test) {
    if (i < 0 || i >= n) throw ArgumentError("test index out of range");
    if (std::find(train.begin(), train.end(), i) != train.end())
      throw ArgumentError("train and test splits overlap at index " + std::to_string(i));
  }
  feature_spec.validate();
  if (crop) {
    if (crop->count < 1) throw ArgumentError("crop count must be >= 1");
    if (crop->side < 4 * feature_spec.largest_window())
      throw ArgumentError("crop side must be at least 4x the largest feature window");
    if (processor == ProcessorKind::blend && crop->side % 2) throw ArgumentError("mosaic crops need an even side");
  }
  if (!(degradation.sigma_255 >= 0.0)) throw ArgumentError("noise sigma must be >= 0");
  if (!(degradation.photon_max > 0.0)) throw ArgumentError("photon_max must be > 0");
  global_simplex.validate();
  adaptive_simplex.validate();
  deblur.validate();
  const std::size_t expected = processor == ProcessorKind::blend ? demosaicers.size()
                               : processor == ProcessorKind::anlm ? 2 : 1;
  if (bounds.size() != expected) throw ArgumentError("wrong number of parameter bounds");
  if (processor == ProcessorKind::blend && demosaicers.size() < 2)
    throw ArgumentError("blending needs at least two demosaicers");
  for (const auto& b : bounds)
    if (!(b.p_min < b.p_max)) throw ArgumentError("bounds of '" + b.name + "' are empty");
}

nlohmann::json to_json(const TrainingRun& run) {
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& p : run.dataset) paths.push_back(p.string());
  nlohmann::json bounds = nlohmann::json::array();
  for (const auto& b : run.bounds)
    bounds.push_back({{"name", b.name},
                      {"p_min", b.p_min},
                      {"p_max", b.p_max},
                      {"discrete", b.discrete == Discreteness::odd_integer}});
  nlohmann::json dem = nlohmann::json::array();
  for (auto id : run.demosaicers) dem.push_back(std::string(to_string(id)));
  nlohmann::json j = {
      {"processor", std::string(to_string(run.processor))},
      {"metric", std::string(to_string(run.metric))},
      {"dataset", paths},
      {"split", {{"train", run.train}, {"test", run.test}}},
      {"degradation",
       {{"sigma", run.degradation.sigma_255},
        {"cfa", std::string(to_string(run.degradation.layout))},
        {"kernel", kernel_json(run.degradation.kernel)},
        {"photon_max", run.degradation.photon_max}}},
      {"feature_spec", to_json(run.feature_spec)},
      {"bounds", bounds},
      {"crop", nullptr},
      {"simplex", {{"global", to_json(run.global_simplex)}, {"adaptive", to_json(run.adaptive_simplex)}}},
      {"seed", run.seed},
      {"anlm", to_json(run.anlm)},
      {"deblur", to_json(run.deblur)},
      {"demosaicers", dem}};
  if (run.crop) j["crop"] = {{"side", run.crop->side}, {"count", run.crop->count}, {"seed", run.crop->seed}};
  return j;
}

TrainingRun training_run_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  try {
    TrainingRun run = TrainingRun::defaults(parse_processor(j.at("processor").get<std::string>()));
    run.metric = parse_metric(j.value("metric", std::string("PSNR")));
    for (const auto& p : j.at("dataset")) {
      std::filesystem::path path = p.get<std::string>();
      run.dataset.push_back(path.is_absolute() || base_dir.empty() ? path : base_dir / path);
    }
    const auto& split = j.at("split");
    run.train = split.at("train").get<std::vector<int>>();
    run.test = split.value("test", std::vector<int>{});
    if (j.contains("demosaicers")) {
      run.demosaicers.clear();
      for (const auto& d : j.at("demosaicers")) run.demosaicers.push_back(parse_demosaicer(d.get<std::string>()));
      run.bounds = default_bounds(run.processor, run.demosaicers.size());
    }
    if (j.contains("degradation")) {
      const auto& d = j.at("degradation");
      run.degradation.sigma_255 = d.value("sigma", run.degradation.sigma_255);
      if (d.contains("cfa")) run.degradation.layout = parse_cfa(d.at("cfa").get<std::string>());
      if (d.contains("kernel")) run.degradation.kernel = kernel_from_json(d.at("kernel"), base_dir);
      run.degradation.photon_max = d.value("photon_max", run.degradation.photon_max);
    }
    if (j.contains("feature_spec")) run.feature_spec = feature_spec_from_json(j.at("feature_spec"));
    if (j.contains("bounds")) {
      run.bounds.clear();
      for (const auto& b : j.at("bounds"))
        run.bounds.push_back({b.at("name").get<std::string>(), b.at("p_min").get<double>(),
                              b.at("p_max").get<double>(),
                              b.value("discrete", false) ? Discreteness::odd_integer : Discreteness::none,
                              CoefficientBlock(1)});
    }
    run.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("crop") && !j.at("crop").is_null()) {
      const auto& c = j.at("crop");
      CropSpec crop;
      crop.side = c.value("side", crop.side);
      crop.count = c.value("count", crop.count);
      crop.seed = c.value("seed", run.seed);
      run.crop = crop;
    }
    if (j.contains("simplex")) {
      const auto& s = j.at("simplex");
      if (s.contains("global")) run.global_simplex = simplex_options_from_json(s.at("global"));
      if (s.contains("adaptive")) run.adaptive_simplex = simplex_options_from_json(s.at("adaptive"));
    }
    if (j.contains("anlm")) run.anlm = anlm_config_from_json(j.at("anlm"));
    run.deblur.kernel = run.degradation.kernel;
    if (j.contains("deblur")) {
      nlohmann::json d = j.at("deblur");
      if (!d.contains("kernel")) d["kernel"] = kernel_json(run.degradation.kernel);
      d["photon_max"] = run.degradation.photon_max;
      run.deblur = deblur_config_from_json(d);
    }
    run.deblur.photon_max = run.degradation.photon_max;
    run.anlm.sigma = run.degradation.sigma_255 / 255.0;
    run.validate();
    return run;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("bad training run: ") + e.what());
  }
}

TrainingRun load_training_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(path.string() + ": " + e.what());
  }
  return training_run_from_json(j, path.parent_path());
}

// ---------------------------------------------------------------- pairs

TrainingPair degrade(const TrainingRun& run, const RasterImage& reference, std::uint64_t seed, std::string name) {
  TrainingPair p;
  p.name = std::move(name);
  p.seed = seed;
  switch (run.processor) {
    case ProcessorKind::anlm:
      p.reference = reference;
      p.input = add_gaussian_noise(reference, run.degradation.sigma_255 / 255.0, seed);
      break;
    case ProcessorKind::blend: {
      if (reference.channels() != 3) throw ArgumentError(p.name + ": demosaicing needs an RGB reference");
      p.reference = reference;
      p.mosaic = mosaic(reference, run.degradation.layout);
      p.input = p.mosaic->image();
      break;
    }
    case ProcessorKind::tv:
      p.reference = to_grayscale(reference);
      p.input = add_poisson_noise(convolve(p.reference, run.degradation.kernel), run.degradation.photon_max, seed);
      break;
  }
  return p;
}

std::vector<TrainingPair> make_pairs(const TrainingRun& run, std::span<const int> indices) {
  std::vector<TrainingPair> out;
  for (int idx : indices) {
    const auto& path = run.dataset.at(idx);
    RasterImage ref = load_image(path);
    if (run.processor == ProcessorKind::blend && (ref.width() % 2 || ref.height() % 2))
      ref = ref.crop(0, 0, ref.width() & ~1, ref.height() & ~1);
    const std::uint64_t seed = run.seed ^ static_cast<std::uint64_t>(idx);
    TrainingPair full = degrade(run, ref, seed, path.stem().string());
    if (!run.crop) {
      out.push_back(std::move(full));
      continue;
    }
    const int side = run.crop->side;
    if (side > ref.width() || side > ref.height())
      throw ArgumentError(path.string() + " is smaller than the crop side");
    boost::random::mt19937_64 rng(run.crop->seed ^ static_cast<std::uint64_t>(idx));
    boost::random::uniform_int_distribution<int> ux(0, (ref.width() - side) / 2), uy(0, (ref.height() - side) / 2);
    for (int c = 0; c < run.crop->count; ++c) {
      const int x0 = 2 * ux(rng), y0 = 2 * uy(rng);
      TrainingPair p;
      p.name = full.name + "@" + std::to_string(x0) + "_" + std::to_string(y0);
      p.seed = seed;
      p.input = full.input.crop(x0, y0, side, side);
      p.reference = full.reference.crop(x0, y0, side, side);
      if (full.mosaic) p.mosaic = BayerMosaic(p.input, run.degradation.layout);
      out.push_back(std::move(p));
    }
  }
  return out;
}

// ------------------------------------------------------ processor config

nlohmann::json processor_config(const TrainingRun& run) {
  switch (run.processor) {
    case ProcessorKind::anlm: {
      AnlmConfig cfg = run.anlm;
      cfg.sigma = run.degradation.sigma_255 / 255.0;
      return to_json(cfg);
    }
    case ProcessorKind::blend: {
      nlohmann::json dem = nlohmann::json::array();
      for (auto id : run.demosaicers) dem.push_back(std::string(to_string(id)));
      return {{"demosaicers", dem}, {"cfa", std::string(to_string(run.degradation.layout))}};
    }
    case ProcessorKind::tv: {
      DeblurConfig cfg = run.deblur;
      cfg.kernel = run.degradation.kernel;
      cfg.photon_max = run.degradation.photon_max;
      return to_json(cfg);
    }
  }
  return nlohmann::json::object();
}

AnlmConfig anlm_config_of(const ParamMapperModel& model) { return anlm_config_from_json(model.processor_config); }

DeblurConfig deblur_config_of(const ParamMapperModel& model) {
  return deblur_config_from_json(model.processor_config);
}

std::vector<DemosaicerId> demosaicers_of(const ParamMapperModel& model) {
  std::vector<DemosaicerId> ids;
  if (!model.processor_config.contains("demosaicers")) return default_demosaicers();
  for (const auto& d : model.processor_config.at("demosaicers")) ids.push_back(parse_demosaicer(d.get<std::string>()));
  return ids;
}

CfaLayout cfa_of(const ParamMapperModel& model) {
  return parse_cfa(model.processor_config.value("cfa", std::string("RGGB")));
}

ParamMapperModel baseline_model(const TrainingRun& run) {
  std::vector<double> values;
  for (const auto& b : run.bounds) values.push_back(0.5 * (b.p_min + b.p_max));
  if (run.processor == ProcessorKind::anlm) {
    values[0] = std::clamp(5.0, run.bounds[0].p_min, run.bounds[0].p_max);
    values[1] = std::clamp(0.40, run.bounds[1].p_min, run.bounds[1].p_max);
  }
  std::vector<ParamSpec> specs = run.bounds;
  for (auto& s : specs) s.block = CoefficientBlock(1);
  ParamMapperModel m = make_global_model(run.processor, std::move(specs), values);
  m.processor_config = processor_config(run);
  return m;
}

ParamMapperModel feature_template(const TrainingRun& run) {
  return embed_global(baseline_model(run), run.feature_spec, FeatureNorm::identity(run.feature_spec.size()));
}

// ------------------------------------------------------ prepared pairs

PreparedPair prepare_pair(TrainingPair pair, const ParamMapperModel& templ) {
  PreparedPair pp;
  pp.pair = std::move(pair);
  pp.spec = templ.feature_spec;
  const TrainingPair& p = pp.pair;
  switch (templ.processor) {
    case ProcessorKind::anlm:
      if (templ.features() > 1) {
        const AnlmConfig cfg = anlm_config_of(templ);
        pp.features = denoise_feature_map(build_feature_map(p.input, templ.feature_spec), p.input, cfg.sigma, cfg);
      }
      break;
    case ProcessorKind::blend: {
      if (!p.mosaic) throw ArgumentError(p.name + ": blending needs a mosaic input");
      for (auto id : demosaicers_of(templ)) pp.candidates.push_back(demosaic(*p.mosaic, id));
      if (templ.features() > 1) pp.features = build_feature_map(*p.mosaic, templ.feature_spec);
      break;
    }
    case ProcessorKind::tv:
      if (templ.features() > 1) pp.features = build_feature_map(p.input, templ.feature_spec);
      break;
  }
  return pp;
}

std::vector<PreparedPair> prepare_pairs(std::vector<TrainingPair> pairs, const ParamMapperModel& templ) {
  std::vector<PreparedPair> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) { out[i] = prepare_pair(std::move(pairs[i]), templ); });
  return out;
}

ParameterField model_field(const ParamMapperModel& model, const PreparedPair& pp) {
  const RasterImage& in = pp.pair.input;
  if (model.features() == 1) return map_field(FeatureMap(in.width(), in.height(), 1), model);
  if (pp.features && pp.spec == model.feature_spec) return map_field(*pp.features, model);
  ParamMapperModel templ = model;
  return map_field(*prepare_pair(pp.pair, templ).features, model);
}

RasterImage run_model(const ParamMapperModel& model, const PreparedPair& pp) {
  const ParameterField field = model_field(model, pp);
  switch (model.processor) {
    case ProcessorKind::anlm: return denoise(pp.pair.input, field, anlm_config_of(model));
    case ProcessorKind::blend: {
      if (pp.candidates.empty()) {
        std::vector<RasterImage> outs;
        for (auto id : demosaicers_of(model)) outs.push_back(demosaic(*pp.pair.mosaic, id));
        return blend(outs, field);
      }
      return blend(pp.candidates, field);
    }
    case ProcessorKind::tv: return deblur(pp.pair.input, field.plane(0), deblur_config_of(model));
  }
  throw ArgumentError("unknown processor");
}

double model_score(const ParamMapperModel& model, std::span<const PreparedPair> pairs, Metric metric) {
  if (pairs.empty()) throw ArgumentError("no pairs to score");
  std::vector<double> scores(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const RasterImage out = run_model(model, pairs[i]);
    scores[i] = out.all_finite() ? evaluate_metric(metric, out, pairs[i].pair.reference) : kPenalty;
  });
  double acc = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s) || s <= kPenalty) return kPenalty;
    acc += s;
  }
  return acc / static_cast<double>(scores.size());
}

Objective make_objective(const ParamMapperModel& templ, std::span<const PreparedPair> pairs, Metric metric) {
  return [templ, pairs, metric](std::span<const double> theta) {
    return model_score(unpack(theta, templ), pairs, metric);
  };
}

// ------------------------------------------------------------- training

TrainingOutcome train_global(const TrainingRun& run, std::span<const PreparedPair> pairs) {
  run.validate();
  const ParamMapperModel start = baseline_model(run);
  const Objective f = make_objective(start, pairs, run.metric);
  TrainingOutcome out;
  out.optimization = nelder_mead(f, pack(start), run.global_simplex);
  out.start_value = out.optimization.trace.front().best_value;
  out.model = unpack(out.optimization.best_point, start);
  return out;
}

ParamMapperModel adaptive_template(const TrainingRun& run, std::span<const PreparedPair> pairs,
                                   const ParamMapperModel& warm) {
  std::vector<FeatureMap> maps;
  for (const auto& pp : pairs) {
    if (!pp.features || pp.spec != run.feature_spec)
      throw ArgumentError("prepared pairs lack the run's feature maps");
    maps.push_back(*pp.features);
  }
  ParamMapperModel m = embed_global(warm, run.feature_spec, compute_feature_norm(maps));
  m.processor_config = processor_config(run);
  return m;
}

TrainingOutcome train_adaptive(const TrainingRun& run, std::span<const PreparedPair> pairs,
                               const ParamMapperModel& warm) {
  run.validate();
  if (warm.processor != run.processor) throw ArgumentError("warm model is for another processor");
  const ParamMapperModel start = adaptive_template(run, pairs, warm);
  const Objective f = make_objective(start, pairs, run.metric);
  TrainingOutcome out;
  out.optimization = nelder_mead(f, pack(start), run.adaptive_simplex);
  out.start_value = out.optimization.trace.front().best_value;
  out.model = unpack(out.optimization.best_point, start);
  return out;
}

// ------------------------------------------------------------- reports

double ReportEntry::value(Metric m) const {
  switch (m) {
    case Metric::psnr: return psnr;
    case Metric::ssim: return ssim;
    case Metric::ms_ssim: return ms_ssim;
  }
  return psnr;
}

double TrainingReport::mean(const std::string& split, const std::string& variant, Metric m) const {
  double acc = 0.0;
  int n = 0;
  for (const auto& e : entries)
    if (e.split == split && e.variant == variant) acc += e.value(m), ++n;
  if (n == 0) throw ArgumentError("no report rows for " + split + "/" + variant);
  return acc / n;
}

std::string TrainingReport::text_table() const {
  std::size_t sw = 5, vw = 7;
  for (const auto& s : splits) sw = std::max(sw, s.size());
  for (const auto& v : variants) vw = std::max(vw, v.size());
  const int a = static_cast<int>(sw) + 2, b = static_cast<int>(vw) + 2;
  std::ostringstream os;
  os << std::left << std::setw(a) << "split" << std::setw(b) << "variant" << std::right << std::setw(10) << "PSNR"
     << std::setw(10) << "SSIM" << std::setw(10) << "MS-SSIM" << '\n';
  os << std::fixed;
  for (const auto& s : splits)
    for (const auto& v : variants) {
      os << std::left << std::setw(a) << s << std::setw(b) << v << std::right << std::setprecision(3)
         << std::setw(10) << mean(s, v, Metric::psnr) << std::setprecision(4) << std::setw(10)
         << mean(s, v, Metric::ssim) << std::setw(10) << mean(s, v, Metric::ms_ssim) << '\n';
    }
  if (!global_params.empty()) {
    os << "global parameters:";
    for (const auto& [name, value] : global_params) os << ' ' << name << '=' << std::setprecision(6) << value;
    os << '\n';
  }
  if (global_evaluations || adaptive_evaluations)
    os << "evaluations: global " << global_evaluations << ", adaptive " << adaptive_evaluations << '\n';
  return os.str();
}

std::string TrainingReport::csv() const {
  std::ostringstream os;
  os << "split,image,variant,psnr,ssim,ms_ssim\n" << std::setprecision(17);
  for (const auto& e : entries)
    os << e.split << ',' << e.image << ',' << e.variant << ',' << e.psnr << ',' << e.ssim << ',' << e.ms_ssim << '\n';
  return os.str();
}

TrainingReport evaluate(std::span<const NamedModel> models, std::span<const EvalSet> sets) {
  if (models.empty()) throw ArgumentError("nothing to evaluate");
  const ProcessorKind kind = models.front().model.processor;
  for (const auto& m : models)
    if (m.model.processor != kind) throw ArgumentError("models are for different processors");

  TrainingReport rep;
  if (kind == ProcessorKind::blend) {
    for (auto id : demosaicers_of(models.front().model)) rep.variants.emplace_back(to_string(id));
  } else {
    rep.variants.emplace_back("input");
  }
  for (const auto& m : models) rep.variants.push_back(m.name);

  auto score = [](const RasterImage& out, const RasterImage& ref) {
    return std::array<double, 3>{psnr(out, ref), ssim(out, ref), ms_ssim(out, ref)};
  };
  for (const auto& set : sets) {
    rep.splits.push_back(set.name);
    const std::size_t nv = rep.variants.size();
    std::vector<std::array<double, 3>> cells(set.pairs.size() * nv);
    parallel_for(set.pairs.size(), [&](std::size_t i) {
      const PreparedPair& pp = set.pairs[i];
      const RasterImage& ref = pp.pair.reference;
      std::size_t v = 0;
      if (kind == ProcessorKind::blend) {
        for (auto id : demosaicers_of(models.front().model)) {
          const RasterImage out = pp.candidates.empty() ? demosaic(*pp.pair.mosaic, id)
                                                        : pp.candidates.at(v);
          cells[i * nv + v++] = score(out, ref);
        }
      } else {
        cells[i * nv + v++] = score(pp.pair.input, ref);
      }
      for (const auto& m : models) cells[i * nv + v++] = score(run_model(m.model, pp), ref);
    });
    for (std::size_t i = 0; i < set.pairs.size(); ++i)
      for (std::size_t v = 0; v < nv; ++v) {
        const auto& c = cells[i * nv + v];
        rep.entries.push_back({set.name, set.pairs[i].pair.name, rep.variants[v], c[0], c[1], c[2]});
      }
  }
  return rep;
}

}  // namespace adaptune
