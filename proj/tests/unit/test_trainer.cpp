#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "adaptune/trainer.hpp"

using namespace adaptune;

namespace {

const std::vector<std::string> kImages{"astronaut", "coffee", "chelsea", "rocket",
                                       "immunohistochemistry", "hubble_deep_field", "colorwheel", "camera"};

TrainingRun small_run(ProcessorKind kind) {
  TrainingRun run = TrainingRun::defaults(kind);
  for (const auto& n : kImages) run.dataset.push_back(std::filesystem::path(ADAPTUNE_TEST_DATA) / (n + ".png"));
  run.train = {0, 1};
  run.test = {4};
  run.crop = CropSpec{36, 1, 3};
  run.seed = 9;
  run.global_simplex.max_evals = 12;
  run.adaptive_simplex.max_evals = 12;
  run.deblur.iterations = 15;
  return run;
}

}  // namespace

TEST_CASE("run validation") {
  TrainingRun run = small_run(ProcessorKind::anlm);
  CHECK_NOTHROW(run.validate());
  run.test = {1};
  CHECK_THROWS_AS(run.validate(), ArgumentError);
  run = small_run(ProcessorKind::anlm);
  run.crop->side = 8;
  CHECK_THROWS_AS(run.validate(), ArgumentError);
  run = small_run(ProcessorKind::blend);
  run.crop->side = 41;  // odd
  CHECK_THROWS_AS(run.validate(), ArgumentError);
  run = small_run(ProcessorKind::tv);
  run.bounds.push_back(run.bounds[0]);
  CHECK_THROWS_AS(run.validate(), ArgumentError);
}

TEST_CASE("run configs round-trip through json") {
  for (ProcessorKind k : {ProcessorKind::anlm, ProcessorKind::blend, ProcessorKind::tv}) {
    const TrainingRun run = small_run(k);
    const nlohmann::json j = to_json(run);
    CHECK(to_json(training_run_from_json(j)) == j);
  }
  const auto dir = std::filesystem::temp_directory_path() / "adaptune_run_cfg";
  std::filesystem::create_directories(dir);
  nlohmann::json j = to_json(small_run(ProcessorKind::tv));
  j["dataset"] = {"a.png", "b.png"};
  j["split"] = {{"train", {0}}, {"test", {1}}};
  j["degradation"]["kernel"] = {{"side", 5}, {"gaussian_sigma", 1.0}};
  std::ofstream(dir / "run.json") << j.dump();
  const TrainingRun loaded = load_training_run(dir / "run.json");
  CHECK(loaded.dataset[0] == dir / "a.png");
  CHECK(loaded.degradation.kernel.side() == 5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("pairs are deterministic and cropped consistently") {
  for (ProcessorKind k : {ProcessorKind::anlm, ProcessorKind::blend, ProcessorKind::tv}) {
    const TrainingRun run = small_run(k);
    const auto a = make_pairs(run, run.train), b = make_pairs(run, run.train);
    REQUIRE(a.size() == 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].name == b[i].name);
      CHECK(a[i].input == b[i].input);
      CHECK(a[i].reference == b[i].reference);
      CHECK(a[i].input.width() == 36);
      CHECK(a[i].reference.height() == 36);
      CHECK(a[i].seed == (run.seed ^ static_cast<std::uint64_t>(run.train[i])));
    }
    CHECK(a[0].input.channels() == (k == ProcessorKind::anlm ? 3 : 1));
    CHECK(a[0].reference.channels() == (k == ProcessorKind::tv ? 1 : 3));
    CHECK(a[0].mosaic.has_value() == (k == ProcessorKind::blend));
    if (k != ProcessorKind::blend) {
      TrainingRun other = run;
      other.seed = 10;
      CHECK_FALSE(make_pairs(other, run.train)[0].input == a[0].input);
    }
  }
}

TEST_CASE("global and adaptive training nest") {
  for (ProcessorKind k : {ProcessorKind::anlm, ProcessorKind::blend, ProcessorKind::tv}) {
    const TrainingRun run = small_run(k);
    const auto pairs = prepare_pairs(make_pairs(run, run.train), feature_template(run));
    const double base = model_score(baseline_model(run), pairs, run.metric);
    const TrainingOutcome g = train_global(run, pairs);
    CHECK(g.start_value == base);
    CHECK(g.optimization.best_value >= base);
    CHECK(g.model.features() == 1);
    CHECK(model_score(g.model, pairs, run.metric) == g.optimization.best_value);
    const ParamMapperModel emb = adaptive_template(run, pairs, g.model);
    CHECK(model_score(emb, pairs, run.metric) == g.optimization.best_value);
    const TrainingOutcome a = train_adaptive(run, pairs, g.model);
    CHECK(a.start_value == g.optimization.best_value);
    CHECK(a.optimization.best_value >= g.optimization.best_value);
    CHECK(a.model.features() == run.feature_spec.size());
    CHECK(a.optimization.evaluations <= run.adaptive_simplex.max_evals);

    const TrainingOutcome again = train_global(run, pairs);
    CHECK(to_json(again.model) == to_json(g.model));
  }
}

TEST_CASE("reports") {
  const TrainingRun run = small_run(ProcessorKind::blend);
  const ParamMapperModel templ = feature_template(run);
  std::vector<EvalSet> sets{{"train", prepare_pairs(make_pairs(run, run.train), templ)},
                            {"test", prepare_pairs(make_pairs(run, run.test), templ)}};
  const std::vector<NamedModel> models{{"baseline", baseline_model(run)}};
  const TrainingReport rep = evaluate(models, sets);
  CHECK(rep.variants == std::vector<std::string>{"bilinear", "gradient-corrected", "edge-directed", "baseline"});
  CHECK(rep.entries.size() == 3 * 4);
  std::istringstream csv(rep.csv());
  std::string line;
  std::getline(csv, line);
  CHECK(line == "split,image,variant,psnr,ssim,ms_ssim");
  double sum = 0.0;
  int n = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 6);
    if (cells[0] == "train" && cells[2] == "baseline") {
      sum += std::stod(cells[3]);
      ++n;
    }
  }
  CHECK(n == 2);
  CHECK(rep.mean("train", "baseline", Metric::psnr) == doctest::Approx(sum / n).epsilon(1e-14));
  CHECK(rep.text_table().find("baseline") != std::string::npos);
}
