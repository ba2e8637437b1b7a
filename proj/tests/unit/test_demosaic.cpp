#include <algorithm>
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "adaptune/demosaic.hpp"
#include "adaptune/image_io.hpp"
#include "adaptune/metrics.hpp"
#include "adaptune/synthesis.hpp"
#include "../support/oracles.hpp"

using namespace adaptune;

namespace {

ParamMapperModel blend_model(std::vector<double> theta0) {
  ParamMapperModel m;
  m.processor = ProcessorKind::blend;
  m.feature_spec = FeatureSpec{};
  m.feature_norm = FeatureNorm::identity(1);
  m.params = blend_param_specs(theta0.size());
  for (std::size_t k = 0; k < theta0.size(); ++k) {
    m.params[k].block = CoefficientBlock(1);
    m.params[k].block.theta0 = theta0[k];
  }
  return m;
}

}  // namespace

TEST_CASE("demosaicers on constant images") {
  for (CfaLayout layout : {CfaLayout::RGGB, CfaLayout::BGGR, CfaLayout::GRBG, CfaLayout::GBRG}) {
    const BayerMosaic m = mosaic(RasterImage(16, 12, 3, 0.42), layout);
    for (DemosaicerId id : default_demosaicers()) {
      const RasterImage out = demosaic(m, id);
      CHECK(out.channels() == 3);
      for (double v : out.samples()) CHECK(v == doctest::Approx(0.42).epsilon(1e-14));
    }
  }
}

TEST_CASE("demosaicers keep measured sites") {
  const RasterImage rgb = oracle::random_image(20, 18, 3, 3);
  for (CfaLayout layout : {CfaLayout::RGGB, CfaLayout::GBRG}) {
    const BayerMosaic m = mosaic(rgb, layout);
    for (DemosaicerId id : default_demosaicers()) {
      const BayerMosaic again = mosaic(demosaic(m, id), layout);
      CHECK(again.image() == m.image());
    }
  }
}

TEST_CASE("edge-directed beats bilinear on a step edge") {
  RasterImage truth(32, 32, 3);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c) truth.at(x, y, c) = y < 15 ? 0.2 + 0.1 * c : 0.8 - 0.1 * c;
  const BayerMosaic m = mosaic(truth, CfaLayout::RGGB);
  CHECK(mse(demosaic(m, DemosaicerId::edge_directed), truth) < mse(demosaic(m, DemosaicerId::bilinear), truth));
}

TEST_CASE("blend") {
  const std::vector<RasterImage> outs{oracle::random_image(12, 10, 3, 1), oracle::random_image(12, 10, 3, 2),
                                      oracle::random_image(12, 10, 3, 3)};
  const std::vector<double> uniform{0.3, 0.3, 0.3};
  const RasterImage avg = blend(outs, ParameterField::constant(12, 10, uniform));
  for (std::size_t i = 0; i < avg.samples().size(); ++i) {
    const double want = (outs[0].samples()[i] + outs[1].samples()[i] + outs[2].samples()[i]) / 3.0;
    CHECK(avg.samples()[i] == doctest::Approx(want).epsilon(1e-14));
  }
  const std::vector<double> hot{0.0, 1.0, 0.0};
  CHECK(blend(outs, ParameterField::constant(12, 10, hot)) == outs[1]);
  const std::vector<double> skewed{0.50, 0.44, 0.06};
  const RasterImage mix = blend(outs, ParameterField::constant(12, 10, skewed));
  for (std::size_t i = 0; i < mix.samples().size(); ++i) {
    const double want = 0.50 * outs[0].samples()[i] + 0.44 * outs[1].samples()[i] + 0.06 * outs[2].samples()[i];
    CHECK(std::abs(mix.samples()[i] - want) < 1e-14);
  }
  const std::vector<double> zero{0.0, 0.0, 0.0};
  const RasterImage fallback = blend(outs, ParameterField::constant(12, 10, zero));
  for (std::size_t i = 0; i < avg.samples().size(); ++i)
    CHECK(fallback.samples()[i] == doctest::Approx(avg.samples()[i]).epsilon(1e-14));

  ParameterField f(12, 10, 3), g(12, 10, 3), perm(12, 10, 3);
  const RasterImage w = oracle::random_image(12, 10, 3, 9);
  for (std::size_t i = 0; i < f.pixel_count(); ++i)
    for (int k = 0; k < 3; ++k) {
      f.at(i, k) = w.samples()[k * f.pixel_count() + i];
      g.at(i, k) = 0.37 * f.at(i, k);
      perm.at(i, (k + 2) % 3) = f.at(i, k);
    }
  const RasterImage bf = blend(outs, f), bg = blend(outs, g);
  const std::vector<RasterImage> rotated{outs[1], outs[2], outs[0]};
  const RasterImage bp = blend(rotated, perm);
  for (std::size_t i = 0; i < bf.samples().size(); ++i) {
    CHECK(std::abs(bf.samples()[i] - bg.samples()[i]) < 1e-14);
    CHECK(std::abs(bf.samples()[i] - bp.samples()[i]) < 1e-14);
    const double lo = std::min({outs[0].samples()[i], outs[1].samples()[i], outs[2].samples()[i]});
    const double hi = std::max({outs[0].samples()[i], outs[1].samples()[i], outs[2].samples()[i]});
    CHECK(bf.samples()[i] >= lo - 1e-15);
    CHECK(bf.samples()[i] <= hi + 1e-15);
  }
  CHECK_THROWS_AS(blend(std::vector<RasterImage>{outs[0], RasterImage(12, 10, 1)}, f), ArgumentError);
}

TEST_CASE("adaptive blending") {
  const RasterImage rgb = oracle::random_image(24, 24, 3, 4);
  const BayerMosaic m = mosaic(rgb, CfaLayout::RGGB);
  const auto ids = default_demosaicers();
  for (int k = 0; k < 3; ++k) {
    std::vector<double> t{-30.0, -30.0, -30.0};
    t[k] = 30.0;
    const RasterImage out = blend_adaptive(m, blend_model(t), ids);
    const RasterImage single = demosaic(m, ids[k]);
    double worst = 0.0;
    for (std::size_t i = 0; i < out.samples().size(); ++i)
      worst = std::max(worst, std::abs(out.samples()[i] - single.samples()[i]));
    CHECK(worst < 1e-3);
  }
  ParamMapperModel wrong = blend_model({0.0, 0.0});
  CHECK_THROWS_AS(blend_adaptive(m, wrong, ids), ArgumentError);
  wrong = blend_model({0.0, 0.0, 0.0});
  wrong.processor = ProcessorKind::anlm;
  CHECK_THROWS_AS(blend_adaptive(m, wrong, ids), ArgumentError);
  const RasterImage u = blend_adaptive(m, blend_model({0.0, 0.0, 0.0}), ids);
  std::vector<RasterImage> outs;
  for (auto id : ids) outs.push_back(demosaic(m, id));
  CHECK(u == blend(outs, ParameterField::constant(24, 24, std::vector<double>{0.5, 0.5, 0.5})));
}

TEST_CASE("blend maps") {
  const RasterImage uni = blend_map_image(ParameterField::constant(4, 4, std::vector<double>{0.2, 0.2, 0.2}));
  for (double v : uni.samples()) CHECK(v == doctest::Approx(1.0 / 3.0));
  const RasterImage red = blend_map_image(ParameterField::constant(4, 4, std::vector<double>{1.0, 0.0, 0.0}));
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      CHECK(red.at(x, y, 0) == 1.0);
      CHECK(red.at(x, y, 1) == 0.0);
      CHECK(red.at(x, y, 2) == 0.0);
    }
  ParameterField f(6, 5, 3);
  const RasterImage w = oracle::random_image(6, 5, 3, 12);
  for (std::size_t i = 0; i < f.pixel_count(); ++i)
    for (int k = 0; k < 3; ++k) f.at(i, k) = w.samples()[k * f.pixel_count() + i];
  const auto path = std::filesystem::temp_directory_path() / "adaptune_blend_map.png";
  export_blend_map(f, path);
  const RasterImage back = load_image(path);
  std::filesystem::remove(path);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x) CHECK(std::abs(back.at(x, y, 0) + back.at(x, y, 1) + back.at(x, y, 2) - 1.0) < 2e-4);
  CHECK_THROWS_AS(export_blend_map(ParameterField(4, 4, 4), path), ArgumentError);
}
