// adaptune command line: synth, train, apply, eval, dump-params.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adaptune/anlm.hpp"
#include "adaptune/deblur.hpp"
#include "adaptune/demosaic.hpp"
#include "adaptune/image_io.hpp"
#include "adaptune/parallel.hpp"
#include "adaptune/param_model.hpp"
#include "adaptune/synthesis.hpp"
#include "adaptune/trainer.hpp"

namespace fs = std::filesystem;
using namespace adaptune;

namespace {

constexpr const char* kVersion = "1.0.0";

// Bad invocation; exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check_output(const fs::path& out, const std::vector<fs::path>& inputs, bool force) {
  for (const auto& in : inputs) {
    std::error_code ec;
    if (fs::exists(out) && fs::exists(in) && fs::equivalent(out, in, ec))
      throw UsageError("refusing to overwrite input " + in.string());
  }
  if (fs::exists(out) && !force) throw UsageError(out.string() + " exists (use --force to overwrite)");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// ------------------------------------------------------------------ synth

struct SynthArgs {
  std::string mode = "gaussian";
  double sigma = 20.0;
  double photons = 1024.0;
  std::string blur;
  std::string cfa = "RGGB";
  std::uint64_t seed = 0;
  bool force = false;
  std::vector<std::string> paths;
};

int run_synth(const SynthArgs& a) {
  if (a.paths.size() < 2) throw UsageError("synth needs at least one reference and an output directory");
  const fs::path outdir = a.paths.back();
  std::vector<fs::path> refs(a.paths.begin(), a.paths.end() - 1);
  if (a.mode != "gaussian" && a.mode != "poisson" && a.mode != "mosaic")
    throw UsageError("unknown mode '" + a.mode + "'");
  if (a.sigma < 0.0) throw UsageError("--sigma must be >= 0");
  if (a.photons <= 0.0) throw UsageError("--photons must be > 0");
  const CfaLayout layout = parse_cfa(a.cfa);
  const BlurKernel kernel = a.blur.empty() ? gaussian_kernel(7, 2.0) : load_kernel(a.blur);

  fs::create_directories(outdir);
  const fs::path manifest = outdir / "manifest.csv";
  check_output(manifest, refs, a.force);
  std::ostringstream csv;
  csv << "input_path,reference_path,seed,mode,param1,param2\n";
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const std::uint64_t seed = a.seed ^ i;
    RasterImage ref = load_image(refs[i]);
    fs::path out;
    std::string p1, p2;
    if (a.mode == "gaussian") {
      out = outdir / (refs[i].stem().string() + "_noisy.png");
      check_output(out, refs, a.force);
      save_image(add_gaussian_noise(ref, a.sigma / 255.0, seed), out, 16);
      std::ostringstream s;
      s << a.sigma;
      p1 = s.str();
    } else if (a.mode == "poisson") {
      out = outdir / (refs[i].stem().string() + "_blurred.png");
      check_output(out, refs, a.force);
      save_image(add_poisson_noise(convolve(to_grayscale(ref), kernel), a.photons, seed), out, 16);
      std::ostringstream s;
      s << a.photons;
      p1 = s.str();
      p2 = a.blur.empty() ? "gaussian7x7s2" : a.blur;
    } else {
      if (ref.channels() != 3) throw UsageError(refs[i].string() + ": mosaicking needs an RGB image");
      if (ref.width() % 2 || ref.height() % 2) ref = ref.crop(0, 0, ref.width() & ~1, ref.height() & ~1);
      out = outdir / (refs[i].stem().string() + "_mosaic.pgm");
      check_output(out, refs, a.force);
      save_image(mosaic(ref, layout).image(), out, 16);
      p1 = a.cfa;
    }
    csv << out.filename().string() << ',' << fs::absolute(refs[i]).lexically_normal().string() << ',' << seed << ','
        << a.mode << ',' << p1 << ',' << p2 << '\n';
  }
  write_text(manifest, csv.str());
  std::cout << "wrote " << refs.size() << " images and " << manifest.string() << '\n';
  return 0;
}

// ------------------------------------------------------------------ train

struct TrainArgs {
  std::string config;
  std::string out;
  std::string trace;
  std::string global_out;
  std::string report;
  std::string report_csv;
  std::string stage = "both";
  bool force = false;
};

int run_train(const TrainArgs& a) {
  if (a.stage != "global" && a.stage != "both") throw UsageError("--stage must be global or both");
  const TrainingRun run = load_training_run(a.config);
  for (const auto& p : {a.out, a.trace, a.global_out, a.report, a.report_csv})
    if (!p.empty()) check_output(p, {a.config}, a.force);

  const auto t0 = std::chrono::steady_clock::now();
  const ParamMapperModel templ = feature_template(run);
  const bool adaptive = a.stage == "both" && run.feature_spec.size() > 1;
  const ParamMapperModel& prep_model = adaptive ? templ : baseline_model(run);
  const std::vector<PreparedPair> train = prepare_pairs(make_pairs(run, run.train), prep_model);

  const TrainingOutcome global = train_global(run, train);
  std::optional<TrainingOutcome> adapt;
  if (adaptive) adapt = train_adaptive(run, train, global.model);
  const ParamMapperModel& final_model = adapt ? adapt->model : global.model;

  save_model(final_model, a.out);
  if (!a.global_out.empty()) save_model(global.model, a.global_out);
  if (!a.trace.empty()) {
    std::ostringstream t;
    t << "stage,evaluation,best_value\n" << std::setprecision(17);
    for (const auto& p : global.optimization.trace) t << "global," << p.eval_index << ',' << p.best_value << '\n';
    if (adapt)
      for (const auto& p : adapt->optimization.trace) t << "adaptive," << p.eval_index << ',' << p.best_value << '\n';
    write_text(a.trace, t.str());
  }

  std::vector<NamedModel> models{{"baseline", baseline_model(run)}, {"global", global.model}};
  if (adapt) models.push_back({"adaptive", adapt->model});
  std::vector<EvalSet> sets;
  sets.push_back({"train", train});
  if (!run.test.empty()) sets.push_back({"test", prepare_pairs(make_pairs(run, run.test), prep_model)});
  TrainingReport rep = evaluate(models, sets);
  const FeatureMap unit(1, 1, 1);
  const ParameterField gf = map_field(unit, global.model);
  for (int k = 0; k < gf.params(); ++k) rep.global_params.emplace_back(global.model.params[k].name, gf.at(0, k));
  rep.global_evaluations = global.optimization.evaluations;
  rep.adaptive_evaluations = adapt ? adapt->optimization.evaluations : 0;

  std::cout << rep.text_table();
  if (!a.report.empty()) write_text(a.report, rep.text_table());
  if (!a.report_csv.empty()) write_text(a.report_csv, rep.csv());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "training took " << secs << " s\n";
  return 0;
}

// ------------------------------------------------------------------ apply

struct ProcessorFlags {
  std::string processor;
  std::string model;
  std::string global;
  double sigma = -1.0;
  std::string kernel;
  double photons = -1.0;
  std::string cfa;
};

// Model from --model or --global, with processor flags overriding the
// stored settings.
ParamMapperModel resolve_model(const ProcessorFlags& f) {
  if (f.model.empty() == f.global.empty()) throw UsageError("give exactly one of --model and --global");
  ParamMapperModel m;
  if (!f.model.empty()) {
    m = load_model(f.model);
    if (!f.processor.empty() && parse_processor(f.processor) != m.processor)
      throw UsageError("--processor does not match the model");
  } else {
    if (f.processor.empty()) throw UsageError("--global needs --processor");
    TrainingRun run = TrainingRun::defaults(parse_processor(f.processor));
    std::vector<double> values;
    std::stringstream ss(f.global);
    for (std::string cell; std::getline(ss, cell, ',');) values.push_back(std::stod(cell));
    if (values.size() != run.bounds.size())
      throw UsageError("--global needs " + std::to_string(run.bounds.size()) + " comma-separated values");
    for (std::size_t k = 0; k < values.size(); ++k)
      if (!(values[k] > run.bounds[k].p_min && values[k] < run.bounds[k].p_max))
        throw UsageError("--global value for " + run.bounds[k].name + " must lie strictly inside its bounds");
    m = make_global_model(run.processor, run.bounds, values);
    m.processor_config = processor_config(run);
  }
  auto& cfg = m.processor_config;
  if (f.sigma >= 0.0 && m.processor == ProcessorKind::anlm) cfg["sigma"] = f.sigma / 255.0;
  if (!f.kernel.empty() && m.processor == ProcessorKind::tv) {
    const BlurKernel k = load_kernel(f.kernel);
    const auto w = k.weights();
    cfg["kernel"] = {{"side", k.side()}, {"weights", std::vector<double>(w.begin(), w.end())}};
  }
  if (f.photons > 0.0 && m.processor == ProcessorKind::tv) cfg["photon_max"] = f.photons;
  if (!f.cfa.empty() && m.processor == ProcessorKind::blend) cfg["cfa"] = std::string(to_string(parse_cfa(f.cfa)));
  m.validate();
  return m;
}

TrainingPair input_pair(const ParamMapperModel& m, RasterImage input, RasterImage reference, std::string name) {
  TrainingPair p;
  p.name = std::move(name);
  if (m.processor == ProcessorKind::blend) {
    if (input.channels() != 1) throw UsageError(p.name + ": blending expects a single-channel mosaic");
    p.mosaic = BayerMosaic(input, cfa_of(m));
  } else if (m.processor == ProcessorKind::tv && input.channels() != 1) {
    throw UsageError(p.name + ": deblurring expects a single-channel image");
  }
  if (m.processor == ProcessorKind::tv && reference.channels() == 3) reference = to_grayscale(reference);
  p.input = std::move(input);
  p.reference = std::move(reference);
  return p;
}

struct ApplyArgs {
  ProcessorFlags proc;
  std::string input;
  std::string output;
  std::string dump_blend;
  std::vector<std::string> external;
  int bitdepth = 8;
  bool force = false;
};

int run_apply(const ApplyArgs& a) {
  const ParamMapperModel m = resolve_model(a.proc);
  check_output(a.output, {a.input}, a.force);
  if (!a.dump_blend.empty()) check_output(a.dump_blend, {a.input}, a.force);
  if (m.processor != ProcessorKind::blend && (!a.external.empty() || !a.dump_blend.empty()))
    throw UsageError("--external and --dump-blend apply to blending only");
  RasterImage input = load_image(a.input);
  PreparedPair pp = prepare_pair(input_pair(m, input, input, fs::path(a.input).stem().string()), m);
  for (const auto& spec : a.external) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw UsageError("--external expects INDEX=PATH");
    const std::size_t k = std::stoul(spec.substr(0, eq));
    if (k >= pp.candidates.size()) throw UsageError("--external index out of range");
    std::string path = spec.substr(eq + 1);
    if (const auto pos = path.find("%s"); pos != std::string::npos) path.replace(pos, 2, pp.pair.name);
    RasterImage ext = load_image(path);
    if (!ext.same_shape(pp.candidates[k])) throw UsageError(path + " does not match the mosaic size");
    pp.candidates[k] = std::move(ext);
  }
  const RasterImage out = run_model(m, pp);
  save_image(out, a.output, a.bitdepth);
  if (!a.dump_blend.empty()) export_blend_map(model_field(m, pp), a.dump_blend);
  return 0;
}

// ------------------------------------------------------------------- eval

struct EvalArgs {
  std::vector<std::string> models;
  std::string manifest;
  std::string report_csv;
  bool force = false;
};

int run_eval(const EvalArgs& a) {
  if (!a.report_csv.empty()) check_output(a.report_csv, {a.manifest}, a.force);
  std::vector<NamedModel> models;
  for (const auto& p : a.models) models.push_back({fs::path(p).stem().string(), load_model(p)});
  std::ifstream in(a.manifest);
  if (!in) throw IoError("cannot open " + a.manifest);
  const fs::path base = fs::path(a.manifest).parent_path();
  std::string line;
  if (!std::getline(in, line)) throw UsageError(a.manifest + " is empty");
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"input_path", "reference_path"})
    if (!col.count(need)) throw UsageError(a.manifest + " lacks column " + need);

  // Prepare with the widest feature set so every model can reuse it.
  const ParamMapperModel* prep = &models.front().model;
  for (const auto& m : models)
    if (m.model.features() > prep->features()) prep = &m.model;
  std::vector<TrainingPair> pairs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() < header.size()) throw UsageError("short manifest row: " + line);
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    const fs::path ip = resolve(cells[col["input_path"]]), rp = resolve(cells[col["reference_path"]]);
    ParamMapperModel m = *prep;
    if (m.processor == ProcessorKind::blend && col.count("param1") && !cells[col["param1"]].empty())
      m.processor_config["cfa"] = cells[col["param1"]];
    RasterImage ref = load_image(rp);
    if (m.processor == ProcessorKind::blend && (ref.width() % 2 || ref.height() % 2))
      ref = ref.crop(0, 0, ref.width() & ~1, ref.height() & ~1);
    pairs.push_back(input_pair(m, load_image(ip), std::move(ref), ip.stem().string()));
  }
  if (pairs.empty()) throw UsageError(a.manifest + " has no rows");
  std::vector<EvalSet> sets;
  sets.push_back({"manifest", prepare_pairs(std::move(pairs), *prep)});
  const TrainingReport rep = evaluate(models, sets);
  std::cout << rep.text_table();
  if (!a.report_csv.empty()) write_text(a.report_csv, rep.csv());
  return 0;
}

// ------------------------------------------------------------ dump-params

struct DumpArgs {
  ProcessorFlags proc;
  std::string image;
  std::string out;
  bool force = false;
};

int run_dump(const DumpArgs& a) {
  const ParamMapperModel m = resolve_model(a.proc);
  RasterImage input = load_image(a.image);
  const PreparedPair pp = prepare_pair(input_pair(m, input, input, fs::path(a.image).stem().string()), m);
  const ParameterField field = model_field(m, pp);

  std::vector<fs::path> outs;
  for (const auto& p : m.params) outs.emplace_back(a.out + "_" + p.name + ".png");
  outs.emplace_back(a.out + "_params.csv");
  if (m.processor == ProcessorKind::blend) outs.emplace_back(a.out + "_blend.png");
  for (const auto& o : outs) check_output(o, {a.image}, a.force);

  for (int k = 0; k < m.param_count(); ++k) {
    const ParamSpec& s = m.params[k];
    Plane p = field.plane(k);
    for (double& v : p.values) v = (v - s.p_min) / (s.p_max - s.p_min);
    save_image(RasterImage::from_plane(p), outs[k], 16);
  }
  std::ostringstream csv;
  csv << "x,y";
  for (const auto& p : m.params) csv << ',' << p.name;
  csv << '\n' << std::setprecision(17);
  for (int y = 0; y < field.height(); ++y)
    for (int x = 0; x < field.width(); ++x) {
      csv << x << ',' << y;
      for (int k = 0; k < field.params(); ++k) csv << ',' << field.at(x, y, k);
      csv << '\n';
    }
  write_text(outs[m.param_count()], csv.str());
  if (m.processor == ProcessorKind::blend) export_blend_map(field, outs.back());
  return 0;
}

void add_processor_flags(CLI::App* cmd, ProcessorFlags& f) {
  cmd->add_option("--processor", f.processor, "anlm | blend | tv (inferred from --model)");
  cmd->add_option("--model", f.model, "Model JSON file");
  cmd->add_option("--global", f.global, "Bypass the model: comma-separated parameter values");
  cmd->add_option("--sigma", f.sigma, "ANLM noise std on the 0..255 scale");
  cmd->add_option("--kernel", f.kernel, "TV blur kernel text file");
  cmd->add_option("--photons", f.photons, "TV photon budget");
  cmd->add_option("--cfa", f.cfa, "Mosaic layout: RGGB, BGGR, GRBG or GBRG");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned, spatially adaptive parameters for image processing filters"};
  app.set_version_flag("--version", std::string("adaptune ") + kVersion + " (model format " +
                                        std::to_string(kModelFormatVersion) + ")");
  int threads = 0;
  app.add_option("--threads", threads, "Worker cap (default: available cores)")->check(CLI::NonNegativeNumber);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Degrade reference images and write a manifest");
  c_synth->add_option("--mode", synth.mode, "gaussian | poisson | mosaic")->capture_default_str();
  c_synth->add_option("--sigma", synth.sigma, "Gaussian noise std on the 0..255 scale")->capture_default_str();
  c_synth->add_option("--photons", synth.photons, "Poisson photon budget")->capture_default_str();
  c_synth->add_option("--blur", synth.blur, "Blur kernel text file (default 7x7 Gaussian, std 2)");
  c_synth->add_option("--cfa", synth.cfa, "Mosaic layout")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "Base seed; image i uses seed XOR i")->required();
  c_synth->add_flag("--force", synth.force, "Overwrite existing outputs");
  c_synth->add_option("paths", synth.paths, "REF... OUTDIR")->required();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train global and adaptive models from a run config");
  c_train->add_option("--config", train.config, "Run config JSON")->required()->check(CLI::ExistingFile);
  c_train->add_option("--out", train.out, "Output model JSON")->required();
  c_train->add_option("--trace", train.trace, "Optimizer trace CSV");
  c_train->add_option("--global-out", train.global_out, "Also save the global model");
  c_train->add_option("--report", train.report, "Text report");
  c_train->add_option("--report-csv", train.report_csv, "Per-image report CSV");
  c_train->add_option("--stage", train.stage, "global | both")->capture_default_str();
  c_train->add_flag("--force", train.force, "Overwrite existing outputs");

  ApplyArgs apply;
  auto* c_apply = app.add_subcommand("apply", "Process one image with a model");
  add_processor_flags(c_apply, apply.proc);
  c_apply->add_option("--dump-blend", apply.dump_blend, "Write the RGB blend map (blending)");
  c_apply->add_option("--external", apply.external, "INDEX=PATH: replace demosaicer INDEX's output; %s = input stem");
  c_apply->add_option("--bitdepth", apply.bitdepth, "8 or 16")->check(CLI::IsMember({8, 16}))->capture_default_str();
  c_apply->add_flag("--force", apply.force, "Overwrite existing outputs");
  c_apply->add_option("input", apply.input, "Input image")->required();
  c_apply->add_option("output", apply.output, "Output image")->required();

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Metric table for models over a manifest");
  c_eval->add_option("--model", eval.models, "Model JSON (repeatable)")->required();
  c_eval->add_option("--manifest", eval.manifest, "Manifest CSV")->required();
  c_eval->add_option("--report-csv", eval.report_csv, "Per-image CSV");
  c_eval->add_flag("--force", eval.force, "Overwrite existing outputs");

  DumpArgs dump;
  auto* c_dump = app.add_subcommand("dump-params", "Export per-parameter maps and a CSV");
  add_processor_flags(c_dump, dump.proc);
  c_dump->add_option("--image", dump.image, "Input image")->required();
  c_dump->add_option("--out", dump.out, "Output prefix")->required();
  c_dump->add_flag("--force", dump.force, "Overwrite existing outputs");

  app.require_subcommand(1);
  if (argc < 2) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 1;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    std::cout << (subs.empty() ? app.help("", CLI::AppFormatMode::All) : subs.back()->help());
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  set_thread_count(threads);
  try {
    if (*c_synth) return run_synth(synth);
    if (*c_train) return run_train(train);
    if (*c_apply) return run_apply(apply);
    if (*c_eval) return run_eval(eval);
    if (*c_dump) return run_dump(dump);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
