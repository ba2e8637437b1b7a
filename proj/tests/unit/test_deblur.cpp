#include <cmath>

#include "doctest.h"
#include "adaptune/deblur.hpp"
#include "adaptune/metrics.hpp"
#include "adaptune/synthesis.hpp"
#include "../support/oracles.hpp"

using namespace adaptune;

namespace {

Plane to_plane(const std::vector<double>& v, int w, int h) {
  Plane p(w, h);
  p.values = v;
  return p;
}

BlurKernel box3() { return BlurKernel(3, {1, 2, 1, 2, 4, 2, 1, 2, 1}, true); }

}  // namespace

TEST_CASE("poisson divergence") {
  const Plane i = oracle::random_plane(8, 8, 1, 0.1, 0.9);
  CHECK(kl_poisson(i, i, 1024.0) == 0.0);
  CHECK(kl_poisson(Plane(5, 4, 0.0), Plane(5, 4, 0.3), 100.0) == doctest::Approx(100.0 * 20 * 0.3).epsilon(1e-13));
  bool clamped = false;
  kl_poisson(i, Plane(8, 8, -1.0), 10.0, 1e-8, &clamped);
  CHECK(clamped);
  DeblurConfig cfg;
  cfg.kernel = box3();
  cfg.photon_max = 256.0;
  const Plane o = oracle::random_plane(8, 8, 2, 0.2, 0.8);
  const Plane g = kl_gradient(i, o, cfg);
  const auto num = oracle::numeric_gradient(
      [&](const std::vector<double>& x) { return kl_poisson(i, correlate(to_plane(x, 8, 8), cfg.kernel), 256.0); },
      o.values, 1e-5);
  CHECK(oracle::relative_error(g.values, num) < 1e-4);
}

TEST_CASE("smoothed total variation") {
  const Plane flat(6, 7, 0.3);
  CHECK(tv_value(flat, 1e-4) == doctest::Approx(1e-4 * 42).epsilon(1e-12));
  for (double v : tv_gradient(flat, 1e-4).values) CHECK(v == 0.0);
  Plane salt = flat;
  salt(3, 3) = 0.9;
  CHECK(tv_value(salt, 1e-4) > tv_value(flat, 1e-4));
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Plane o = oracle::random_plane(8, 8, 40 + s);
    const auto num = oracle::numeric_gradient(
        [&](const std::vector<double>& x) { return tv_value(to_plane(x, 8, 8), 1e-4); }, o.values, 1e-5);
    CHECK(oracle::relative_error(tv_gradient(o, 1e-4).values, num) < 1e-4);
    const Plane w = oracle::random_plane(8, 8, 60 + s, 0.0, 0.05);
    const auto wnum = oracle::numeric_gradient(
        [&](const std::vector<double>& x) { return tv_value(to_plane(x, 8, 8), 1e-4, w.values); }, o.values, 1e-5);
    CHECK(oracle::relative_error(tv_gradient(o, 1e-4, w.values).values, wnum) < 1e-4);
  }
}

TEST_CASE("cost structure") {
  DeblurConfig cfg;
  cfg.kernel = box3();
  const Plane i = oracle::random_plane(10, 10, 3, 0.1, 0.9);
  const Plane o = oracle::random_plane(10, 10, 4, 0.1, 0.9);
  const Plane zero(10, 10, 0.0);
  CHECK(cost_value(i, o, zero, cfg) == doctest::Approx(kl_poisson(i, correlate(o, cfg.kernel), cfg.photon_max)).epsilon(1e-14));
  const Plane field = oracle::random_plane(10, 10, 5, 0.0, 0.02);
  Plane twice = field;
  for (double& v : twice.values) v *= 2.0;
  const double kl = cost_value(i, o, zero, cfg);
  CHECK(cost_value(i, o, twice, cfg) - kl == doctest::Approx(2.0 * (cost_value(i, o, field, cfg) - kl)).epsilon(1e-10));
  DeblurConfig id;
  CHECK(cost_value(i, i, field, id) == doctest::Approx(id.photon_max * tv_value(i, id.tv_epsilon, field.values)).epsilon(1e-12));
}

TEST_CASE("deblurring behaviour") {
  DeblurConfig id;
  id.iterations = 20;
  const RasterImage obs = RasterImage::from_plane(oracle::random_plane(16, 16, 6, 0.1, 0.9));
  CHECK(deblur_global(obs, 0.0, id) == obs);

  const RasterImage flat_out = deblur_global(obs, tv_param_specs()[0].p_max, id);
  CHECK(tv_value(flat_out.channel_plane(0), 1e-4) < tv_value(obs.channel_plane(0), 1e-4));

  DeblurConfig cfg;
  cfg.kernel = gaussian_kernel(7, 2.0);
  RasterImage truth(64, 64, 1);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) truth.at(x, y) = x < 30 ? 0.2 : 0.8;
  const RasterImage blurred = convolve(truth, cfg.kernel);
  const DeblurResult r = deblur_detailed(blurred, Plane(64, 64, 0.0065), cfg);
  CHECK(psnr(r.image, truth) > psnr(blurred, truth));
  for (std::size_t k = 1; k < r.cost_trace.size(); ++k) CHECK(r.cost_trace[k] <= r.cost_trace[k - 1]);
  CHECK(r.iterations <= cfg.iterations);
  for (double v : r.image.samples()) CHECK_UNARY(v >= 0.0 && v <= 1.0);
  CHECK_THROWS_AS(deblur_global(RasterImage(8, 8, 3), 0.01, cfg), ArgumentError);
}

TEST_CASE("unary model equals a constant field") {
  DeblurConfig cfg;
  cfg.kernel = gaussian_kernel(5, 1.0);
  cfg.iterations = 40;
  const RasterImage obs = add_poisson_noise(RasterImage::from_plane(oracle::random_plane(24, 24, 7, 0.2, 0.8)), 1024, 1);
  const ParamMapperModel g = make_global_model(ProcessorKind::tv, tv_param_specs(), std::vector<double>{0.004});
  const double p = map_param(std::vector<double>{1.0}, 0, g);
  CHECK(p == doctest::Approx(0.004).epsilon(1e-12));
  CHECK(deblur_adaptive(obs, g, cfg) == deblur_global(obs, p, cfg));
  CHECK(deblur_config_from_json(to_json(cfg)).kernel.weights().size() == 25);
}
