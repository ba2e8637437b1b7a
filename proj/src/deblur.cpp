#include "adaptune/deblur.hpp"

#include <algorithm>
#include <cmath>

#include "adaptune/features.hpp"
#include "adaptune/synthesis.hpp"

namespace adaptune {

void DeblurConfig::validate() const {
  if (iterations < 1) throw ArgumentError("deblur iterations must be >= 1");
  if (!(tv_epsilon > 0.0)) throw ArgumentError("tv_epsilon must be > 0");
  if (!(photon_max > 0.0)) throw ArgumentError("photon_max must be > 0");
  if (!(step > 0.0)) throw ArgumentError("deblur step must be > 0");
  if (!(nonneg_floor > 0.0)) throw ArgumentError("nonneg_floor must be > 0");
}

nlohmann::json to_json(const DeblurConfig& c) {
  const auto w = c.kernel.weights();
  return {{"kernel", {{"side", c.kernel.side()}, {"weights", std::vector<double>(w.begin(), w.end())}}},
          {"photon_max", c.photon_max},
          {"iterations", c.iterations},
          {"step", c.step},
          {"tv_epsilon", c.tv_epsilon},
          {"nonneg_floor", c.nonneg_floor}};
}

DeblurConfig deblur_config_from_json(const nlohmann::json& j) {
  DeblurConfig c;
  try {
    if (j.contains("kernel")) {
      const auto& k = j.at("kernel");
      c.kernel = BlurKernel(k.at("side").get<int>(), k.at("weights").get<std::vector<double>>());
    }
    c.photon_max = j.value("photon_max", c.photon_max);
    c.iterations = j.value("iterations", c.iterations);
    c.step = j.value("step", c.step);
    c.tv_epsilon = j.value("tv_epsilon", c.tv_epsilon);
    c.nonneg_floor = j.value("nonneg_floor", c.nonneg_floor);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("bad deblur config: ") + e.what());
  }
  c.validate();
  return c;
}

double kl_poisson(const Plane& i, const Plane& z, double photon_max, double floor, bool* clamped) {
  if (!i.same_shape(z)) throw ArgumentError("kl_poisson inputs differ in shape");
  double acc = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < i.size(); ++k) {
    double zk = z.values[k];
    if (zk < floor) zk = floor, any = true;
    const double ik = i.values[k];
    acc += ik > 0.0 ? zk - ik + ik * std::log(ik / zk) : zk;
  }
  if (clamped) *clamped = any;
  return photon_max * acc;
}

Plane kl_gradient(const Plane& i, const Plane& o, const DeblurConfig& cfg) {
  Plane r = correlate(o, cfg.kernel);
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double z = std::max(r.values[k], cfg.nonneg_floor);
    r.values[k] = cfg.photon_max * (1.0 - i.values[k] / z);
  }
  return correlate_adjoint(r, cfg.kernel);
}

namespace {

void check_weights(const Plane& o, std::span<const double> w) {
  if (w.size() != o.size()) throw ArgumentError("TV weights do not match the image");
}

}  // namespace

double tv_value(const Plane& o, double eps, std::span<const double> w) {
  check_weights(o, w);
  const double e2 = eps * eps;
  double acc = 0.0;
  for (int y = 0; y < o.height; ++y) {
    const int yn = mirror_index(y + 1, o.height);
    for (int x = 0; x < o.width; ++x) {
      const double c = o(x, y);
      const double gx = o(mirror_index(x + 1, o.width), y) - c, gy = o(x, yn) - c;
      acc += w[static_cast<std::size_t>(y) * o.width + x] * std::sqrt(gx * gx + gy * gy + e2);
    }
  }
  return acc;
}

Plane tv_gradient(const Plane& o, double eps, std::span<const double> w) {
  check_weights(o, w);
  const double e2 = eps * eps;
  Plane g(o.width, o.height);
  for (int y = 0; y < o.height; ++y) {
    const int yn = mirror_index(y + 1, o.height);
    for (int x = 0; x < o.width; ++x) {
      const int xn = mirror_index(x + 1, o.width);
      const double c = o(x, y);
      const double gx = o(xn, y) - c, gy = o(x, yn) - c;
      const double s = w[static_cast<std::size_t>(y) * o.width + x] / std::sqrt(gx * gx + gy * gy + e2);
      g(xn, y) += s * gx;
      g(x, yn) += s * gy;
      g(x, y) -= s * (gx + gy);
    }
  }
  return g;
}

double tv_value(const Plane& o, double eps) {
  const std::vector<double> ones(o.size(), 1.0);
  return tv_value(o, eps, ones);
}

Plane tv_gradient(const Plane& o, double eps) {
  const std::vector<double> ones(o.size(), 1.0);
  return tv_gradient(o, eps, ones);
}

namespace {

double cost_impl(const Plane& i, const Plane& o, const Plane& field, const DeblurConfig& cfg, bool* clamped) {
  const Plane z = correlate(o, cfg.kernel);
  return kl_poisson(i, z, cfg.photon_max, cfg.nonneg_floor, clamped) +
         cfg.photon_max * tv_value(o, cfg.tv_epsilon, field.values);
}

}  // namespace

double cost_value(const Plane& i, const Plane& o, const Plane& field, const DeblurConfig& cfg) {
  if (!i.same_shape(o) || !i.same_shape(field)) throw ArgumentError("cost_value inputs differ in shape");
  return cost_impl(i, o, field, cfg, nullptr);
}

DeblurResult deblur_detailed(const RasterImage& observed, const Plane& field, const DeblurConfig& cfg) {
  cfg.validate();
  if (observed.channels() != 1) throw ArgumentError("deblurring expects a single-channel image");
  if (field.width != observed.width() || field.height != observed.height())
    throw ArgumentError("regularization field does not match the image");
  const Plane i = observed.channel_plane(0);

  DeblurResult res;
  Plane o = i;
  for (double& v : o.values) v = std::max(v, cfg.nonneg_floor);
  bool clamped = false;
  double cost = cost_impl(i, o, field, cfg, &clamped);
  res.floor_clamped = clamped;
  res.cost_trace.push_back(cost);

  double step = cfg.step;
  Plane trial(o.width, o.height);
  for (int it = 0; it < cfg.iterations; ++it) {
    Plane g = kl_gradient(i, o, cfg);
    const Plane gt = tv_gradient(o, cfg.tv_epsilon, field.values);
    for (std::size_t k = 0; k < g.size(); ++k) g.values[k] += cfg.photon_max * gt.values[k];

    bool accepted = false;
    double s = it == 0 ? step : 2.0 * step;
    for (int halving = 0; halving <= 20; ++halving, s *= 0.5) {
      for (std::size_t k = 0; k < o.size(); ++k)
        trial.values[k] = std::max(o.values[k] - s * g.values[k], cfg.nonneg_floor);
      const double c = cost_impl(i, trial, field, cfg, &clamped);
      if (c < cost) {
        res.floor_clamped = res.floor_clamped || clamped;
        std::swap(o, trial);
        cost = c;
        step = s;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }
    res.cost_trace.push_back(cost);
    ++res.iterations;
  }
  res.image = RasterImage::from_plane(o);
  res.image.clamp();
  return res;
}

RasterImage deblur(const RasterImage& observed, const Plane& field, const DeblurConfig& cfg) {
  return deblur_detailed(observed, field, cfg).image;
}

RasterImage deblur_global(const RasterImage& observed, double p0, const DeblurConfig& cfg) {
  return deblur(observed, Plane(observed.width(), observed.height(), p0), cfg);
}

RasterImage deblur_adaptive(const RasterImage& observed, const ParamMapperModel& model, const DeblurConfig& cfg) {
  if (model.processor != ProcessorKind::tv) throw ArgumentError("model is not a deblurring model");
  const FeatureMap fm = build_feature_map(observed, model.feature_spec);
  return deblur(observed, map_field(fm, model).plane(0), cfg);
}

std::vector<ParamSpec> tv_param_specs() {
  return {{"regularization", 1e-4, 5e-2, Discreteness::none, CoefficientBlock(1)}};
}

}  // namespace adaptune
