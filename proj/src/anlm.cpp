#include "adaptune/anlm.hpp"

#include <algorithm>
#include <cmath>

#include "adaptune/features.hpp"
#include "adaptune/simd/kernels.hpp"

namespace adaptune {

std::string_view to_string(Aggregation a) {
  return a == Aggregation::center_pixel ? "center-pixel" : "patch-accumulate";
}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "center-pixel") return Aggregation::center_pixel;
  if (s == "patch-accumulate") return Aggregation::patch_accumulate;
  throw ArgumentError("unknown aggregation '" + std::string(s) + "'");
}

void AnlmConfig::validate(int width, int height) const {
  if (neighbors < 1) throw ArgumentError("ANLM needs at least one neighbour");
  if (search_radius < 0) throw ArgumentError("search radius must be >= 0");
  if (!(sigma >= 0.0)) throw ArgumentError("sigma must be >= 0");
  // Fewest candidates occur at a corner.
  const long corner = static_cast<long>(std::min(width, search_radius + 1)) *
                      std::min(height, search_radius + 1);
  if (corner < neighbors) throw ArgumentError("search window holds fewer candidates than N");
}

nlohmann::json to_json(const AnlmConfig& cfg) {
  return {{"neighbors", cfg.neighbors},
          {"search_radius", cfg.search_radius},
          {"aggregation", std::string(to_string(cfg.aggregation))}};
}

AnlmConfig anlm_config_from_json(const nlohmann::json& j) {
  AnlmConfig cfg;
  cfg.neighbors = j.value("neighbors", cfg.neighbors);
  cfg.search_radius = j.value("search_radius", cfg.search_radius);
  if (j.contains("aggregation")) cfg.aggregation = parse_aggregation(j.at("aggregation").get<std::string>());
  return cfg;
}

double anlm_weight(double d2, int p0, double p1, double sigma, int channels) {
  const double excess = std::max(d2 / (static_cast<double>(p0) * p0 * channels) - 2.0 * sigma * sigma, 0.0);
  const double h2 = (p1 * sigma) * (p1 * sigma);
  if (h2 == 0.0) return excess > 0.0 ? 0.0 : 1.0;
  return std::exp(-excess / h2);
}

namespace {

// Sorted insertion keeping the `cap` best; candidates arrive in raster order,
// so an equal distance never displaces an earlier offset.
void insert_match(PatchMatch* list, int& count, int cap, const PatchMatch& m) {
  if (count == cap && !(m.d2 < list[count - 1].d2)) return;
  int pos = count < cap ? count : cap - 1;
  if (count < cap) ++count;
  while (pos > 0 && m.d2 < list[pos - 1].d2) {
    list[pos] = list[pos - 1];
    --pos;
  }
  list[pos] = m;
}

struct PaddedImage {
  int pad = 0;
  int width = 0;  // padded
  int height = 0;
  int channels = 0;
  std::vector<double> samples;  // channel-planar

  const double* row(int c, int y) const {
    return samples.data() + (static_cast<std::size_t>(c) * height + y) * width;
  }
};

PaddedImage pad_image(const RasterImage& img, int pad) {
  PaddedImage p{pad, img.width() + 2 * pad, img.height() + 2 * pad, img.channels(), {}};
  p.samples.resize(static_cast<std::size_t>(p.width) * p.height * p.channels);
  for (int c = 0; c < p.channels; ++c)
    for (int y = 0; y < p.height; ++y)
      for (int x = 0; x < p.width; ++x)
        p.samples[(static_cast<std::size_t>(c) * p.height + y) * p.width + x] = img.mirrored(x - pad, y - pad, c);
  return p;
}

PaddedImage pad_planes(std::span<const Plane> planes, int pad) {
  PaddedImage p{pad, planes[0].width + 2 * pad, planes[0].height + 2 * pad, static_cast<int>(planes.size()), {}};
  p.samples.resize(static_cast<std::size_t>(p.width) * p.height * p.channels);
  for (int c = 0; c < p.channels; ++c)
    for (int y = 0; y < p.height; ++y)
      for (int x = 0; x < p.width; ++x)
        p.samples[(static_cast<std::size_t>(c) * p.height + y) * p.width + x] = planes[c].mirrored(x - pad, y - pad);
  return p;
}

void check_patch_sides(std::span<const int> sides, std::size_t pixels) {
  if (sides.size() != pixels) throw ArgumentError("patch side count does not match image");
  for (int s : sides)
    if (s < 1 || s % 2 == 0) throw ArgumentError("patch sides must be odd and positive");
}

}  // namespace

std::vector<PatchMatch> find_neighbors(const RasterImage& guide, int x, int y, int patch,
                                       const AnlmConfig& cfg) {
  cfg.validate(guide.width(), guide.height());
  if (patch < 1 || patch % 2 == 0) throw ArgumentError("patch side must be odd");
  if (x < 0 || y < 0 || x >= guide.width() || y >= guide.height())
    throw ArgumentError("centre outside image");
  const int h = patch / 2;
  const int r = cfg.search_radius;
  std::vector<PatchMatch> list(cfg.neighbors);
  int count = 0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      if (x + dx < 0 || x + dx >= guide.width() || y + dy < 0 || y + dy >= guide.height()) continue;
      double d2 = 0.0;
      for (int c = 0; c < guide.channels(); ++c)
        for (int ty = -h; ty <= h; ++ty)
          for (int tx = -h; tx <= h; ++tx) {
            const double d = guide.mirrored(x + tx, y + ty, c) - guide.mirrored(x + dx + tx, y + dy + ty, c);
            d2 += d * d;
          }
      insert_match(list.data(), count, cfg.neighbors, {dx, dy, d2});
    }
  list.resize(count);
  return list;
}

NeighborTable compute_neighbor_table(const RasterImage& guide, std::span<const int> patch_sides,
                                     const AnlmConfig& cfg) {
  const int W = guide.width(), H = guide.height();
  cfg.validate(W, H);
  check_patch_sides(patch_sides, guide.plane_size());
  const int hmax = *std::max_element(patch_sides.begin(), patch_sides.end()) / 2;
  const int R = cfg.search_radius;
  const int N = cfg.neighbors;
  const PaddedImage g = pad_image(guide, hmax + R);

  // Squared differences over the reference domain [-hmax, W + hmax)^2 and
  // their integral image (one extra leading row/column of zeros).
  const int dw = W + 2 * hmax, dh = H + 2 * hmax;
  std::vector<double> diff(static_cast<std::size_t>(dw) * dh);
  std::vector<double> integral(static_cast<std::size_t>(dw + 1) * (dh + 1), 0.0);
  const std::size_t iw = static_cast<std::size_t>(dw) + 1;

  NeighborTable table{W, H, N, std::vector<PatchMatch>(static_cast<std::size_t>(W) * H * N)};
  std::vector<int> counts(static_cast<std::size_t>(W) * H, 0);

  for (int dy = -R; dy <= R; ++dy)
    for (int dx = -R; dx <= R; ++dx) {
      std::fill(diff.begin(), diff.end(), 0.0);
      for (int v = 0; v < dh; ++v) {
        std::span<double> acc(diff.data() + static_cast<std::size_t>(v) * dw, dw);
        for (int c = 0; c < g.channels; ++c) {
          const double* ref = g.row(c, v + R) + R;
          const double* nb = g.row(c, v + R + dy) + R + dx;
          simd::sq_diff_accumulate({ref, static_cast<std::size_t>(dw)}, {nb, static_cast<std::size_t>(dw)}, acc);
        }
      }
      for (int v = 0; v < dh; ++v) {
        double run = 0.0;
        for (int u = 0; u < dw; ++u) {
          run += diff[static_cast<std::size_t>(v) * dw + u];
          integral[(v + 1) * iw + u + 1] = integral[v * iw + u + 1] + run;
        }
      }
      const int y_lo = std::max(0, -dy), y_hi = std::min(H, H - dy);
      const int x_lo = std::max(0, -dx), x_hi = std::min(W, W - dx);
      for (int y = y_lo; y < y_hi; ++y)
        for (int x = x_lo; x < x_hi; ++x) {
          const std::size_t pix = static_cast<std::size_t>(y) * W + x;
          const int h = patch_sides[pix] / 2;
          // Box [x - h, x + h] in domain coordinates is shifted by hmax.
          const std::size_t x0 = x - h + hmax, x1 = x + h + hmax + 1;
          const std::size_t y0 = y - h + hmax, y1 = y + h + hmax + 1;
          double d2 = integral[y1 * iw + x1] - integral[y0 * iw + x1] - integral[y1 * iw + x0] + integral[y0 * iw + x0];
          if (dx == 0 && dy == 0) d2 = 0.0;
          d2 = std::max(d2, 0.0);
          insert_match(table.matches.data() + pix * N, counts[pix], N, {dx, dy, d2});
        }
    }
  return table;
}

std::vector<Plane> nlm_filter(const RasterImage& guide, std::span<const Plane> values,
                              std::span<const int> patch_sides, std::span<const double> p1,
                              const AnlmConfig& cfg) {
  const int W = guide.width(), H = guide.height();
  if (values.empty()) return {};
  for (const Plane& v : values)
    if (v.width != W || v.height != H) throw ArgumentError("value planes must match the guide");
  if (p1.size() != guide.plane_size()) throw ArgumentError("p1 count does not match image");
  const NeighborTable table = compute_neighbor_table(guide, patch_sides, cfg);
  const int hmax = *std::max_element(patch_sides.begin(), patch_sides.end()) / 2;
  const int R = cfg.search_radius;
  const PaddedImage val = pad_planes(values, hmax + R);
  const int planes = static_cast<int>(values.size());

  std::vector<Plane> out(planes, Plane(W, H));
  std::vector<double> count;
  if (cfg.aggregation == Aggregation::patch_accumulate) count.assign(static_cast<std::size_t>(W) * H, 0.0);
  std::vector<double> weights(cfg.neighbors);
  std::vector<double> row_buf(2 * hmax + 1);

  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const std::size_t pix = static_cast<std::size_t>(y) * W + x;
      const int p0 = patch_sides[pix];
      const int h = p0 / 2;
      const auto matches = table.at(pix);
      double wsum = 0.0;
      for (std::size_t j = 0; j < matches.size(); ++j) {
        weights[j] = anlm_weight(matches[j].d2, p0, p1[pix], cfg.sigma, guide.channels());
        wsum += weights[j];
      }
      for (std::size_t j = 0; j < matches.size(); ++j) weights[j] /= wsum;

      if (cfg.aggregation == Aggregation::center_pixel) {
        for (int c = 0; c < planes; ++c) {
          double acc = 0.0;
          for (std::size_t j = 0; j < matches.size(); ++j)
            acc += weights[j] * values[c](x + matches[j].dx, y + matches[j].dy);
          out[c](x, y) = acc;
        }
        continue;
      }
      // Denoise the whole reference patch, then spread it over the pixels it
      // covers inside the image.
      const int tx_lo = std::max(-h, -x), tx_hi = std::min(h, W - 1 - x);
      const std::size_t span_len = static_cast<std::size_t>(p0);
      for (int ty = -h; ty <= h; ++ty) {
        if (y + ty < 0 || y + ty >= H) continue;
        for (int c = 0; c < planes; ++c) {
          std::fill_n(row_buf.begin(), span_len, 0.0);
          for (std::size_t j = 0; j < matches.size(); ++j) {
            const double* src = val.row(c, y + matches[j].dy + ty + val.pad) + (x + matches[j].dx - h + val.pad);
            simd::axpy(weights[j], {src, span_len}, {row_buf.data(), span_len});
          }
          double* dst = out[c].values.data() + static_cast<std::size_t>(y + ty) * W + x;
          for (int tx = tx_lo; tx <= tx_hi; ++tx) dst[tx] += row_buf[tx + h];
        }
        double* cnt = count.data() + static_cast<std::size_t>(y + ty) * W + x;
        for (int tx = tx_lo; tx <= tx_hi; ++tx) cnt[tx] += 1.0;
      }
    }

  if (cfg.aggregation == Aggregation::patch_accumulate)
    for (Plane& p : out)
      for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] /= count[i];
  return out;
}

RasterImage denoise(const RasterImage& img, const ParameterField& field, const AnlmConfig& cfg) {
  if (field.width() != img.width() || field.height() != img.height())
    throw ArgumentError("parameter field does not match image");
  if (field.params() < 2) throw ArgumentError("ANLM needs a (p0, p1) parameter field");
  std::vector<int> sides(field.pixel_count());
  std::vector<double> p1(field.pixel_count());
  for (std::size_t i = 0; i < sides.size(); ++i) {
    sides[i] = static_cast<int>(std::lround(field.at(i, 0)));
    p1[i] = field.at(i, 1);
  }
  std::vector<Plane> planes;
  for (int c = 0; c < img.channels(); ++c) planes.push_back(img.channel_plane(c));
  RasterImage out = RasterImage::from_planes(nlm_filter(img, planes, sides, p1, cfg));
  out.clamp();
  return out;
}

RasterImage denoise_global(const RasterImage& img, int p0, double p1, const AnlmConfig& cfg) {
  const double values[2] = {static_cast<double>(p0), p1};
  return denoise(img, ParameterField::constant(img.width(), img.height(), values), cfg);
}

RasterImage denoise_adaptive(const RasterImage& img, const ParamMapperModel& model, const AnlmConfig& cfg) {
  if (model.processor != ProcessorKind::anlm) throw ArgumentError("model is not a denoising model");
  FeatureMap fm = build_feature_map(img, model.feature_spec);
  if (fm.features() > 1) fm = denoise_feature_map(fm, img, cfg.sigma, cfg);
  return denoise(img, map_field(fm, model), cfg);
}

std::vector<ParamSpec> anlm_param_specs() {
  return {ParamSpec{"patch_size", 3.0, 21.0, Discreteness::odd_integer, CoefficientBlock(1)},
          ParamSpec{"filter_h", 0.05, 1.5, Discreteness::none, CoefficientBlock(1)}};
}

}  // namespace adaptune
