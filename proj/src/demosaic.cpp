#include "adaptune/demosaic.hpp"

#include <algorithm>
#include <cmath>

#include "adaptune/features.hpp"
#include "adaptune/image_io.hpp"

namespace adaptune {

std::string_view to_string(DemosaicerId id) {
  switch (id) {
    case DemosaicerId::bilinear: return "bilinear";
    case DemosaicerId::gradient_corrected: return "gradient-corrected";
    case DemosaicerId::edge_directed: return "edge-directed";
  }
  return "bilinear";
}

DemosaicerId parse_demosaicer(std::string_view s) {
  for (auto id : default_demosaicers())
    if (to_string(id) == s) return id;
  throw ArgumentError("unknown demosaicer '" + std::string(s) + "'");
}

std::vector<DemosaicerId> default_demosaicers() {
  return {DemosaicerId::bilinear, DemosaicerId::gradient_corrected, DemosaicerId::edge_directed};
}

namespace {

constexpr int R = 0, G = 1, B = 2;

// Average of the `color` sites among the 3x3 neighbourhood; exact bilinear
// interpolation for Bayer sampling. `values` is read only at those sites.
double neighbour_mean(const Plane& values, const BayerMosaic& m, int x, int y, int color) {
  double acc = 0.0;
  int n = 0;
  for (int v = -1; v <= 1; ++v)
    for (int u = -1; u <= 1; ++u) {
      if (u == 0 && v == 0) continue;
      const int sx = mirror_index(x + u, m.width()), sy = mirror_index(y + v, m.height());
      if (m.color(sx, sy) != color) continue;
      acc += values(sx, sy);
      ++n;
    }
  return n ? acc / n : 0.0;
}

RasterImage bilinear(const BayerMosaic& m) {
  const Plane raw = m.image().channel_plane(0);
  RasterImage out(m.width(), m.height(), 3);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = m.color(x, y) == c ? raw(x, y) : neighbour_mean(raw, m, x, y, c);
  return out;
}

// Malvar-He-Cutler 5x5 gradient-corrected interpolation.
RasterImage gradient_corrected(const BayerMosaic& m) {
  RasterImage out(m.width(), m.height(), 3);
  auto s = [&](int x, int y) { return m.mirrored(x, y); };
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      const int c = m.color(x, y);
      const double c0 = s(x, y);
      out.at(x, y, c) = c0;
      const double axial2 = s(x - 2, y) + s(x + 2, y) + s(x, y - 2) + s(x, y + 2);
      const double cross1 = s(x - 1, y) + s(x + 1, y) + s(x, y - 1) + s(x, y + 1);
      const double diag1 = s(x - 1, y - 1) + s(x + 1, y - 1) + s(x - 1, y + 1) + s(x + 1, y + 1);
      if (c == G) {
        const double h1 = s(x - 1, y) + s(x + 1, y), v1 = s(x, y - 1) + s(x, y + 1);
        const double h2 = s(x - 2, y) + s(x + 2, y), v2 = s(x, y - 2) + s(x, y + 2);
        const double along_row = (5.0 * c0 + 4.0 * h1 - h2 - diag1 + 0.5 * v2) / 8.0;
        const double along_col = (5.0 * c0 + 4.0 * v1 - v2 - diag1 + 0.5 * h2) / 8.0;
        const int row_color = m.color(mirror_index(x + 1, m.width()), y);
        out.at(x, y, row_color) = along_row;
        out.at(x, y, row_color == R ? B : R) = along_col;
      } else {
        out.at(x, y, G) = (4.0 * c0 + 2.0 * cross1 - axial2) / 8.0;
        out.at(x, y, c == R ? B : R) = (6.0 * c0 + 2.0 * diag1 - 1.5 * axial2) / 8.0;
      }
    }
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x)
        if (m.color(x, y) != c) out.at(x, y, c) = std::clamp(out.at(x, y, c), 0.0, 1.0);
  return out;
}

// Hamilton-Adams style: green along the axis with the smaller gradient plus
// a same-colour Laplacian correction; chroma by bilinear interpolation of
// colour differences.
RasterImage edge_directed(const BayerMosaic& m) {
  const int W = m.width(), H = m.height();
  auto s = [&](int x, int y) { return m.mirrored(x, y); };
  Plane green(W, H);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      if (m.color(x, y) == G) {
        green(x, y) = s(x, y);
        continue;
      }
      const double c0 = s(x, y);
      const double lap_h = 2.0 * c0 - s(x - 2, y) - s(x + 2, y);
      const double lap_v = 2.0 * c0 - s(x, y - 2) - s(x, y + 2);
      const double dh = std::abs(s(x - 1, y) - s(x + 1, y)) + std::abs(lap_h);
      const double dv = std::abs(s(x, y - 1) - s(x, y + 1)) + std::abs(lap_v);
      const double gh = 0.5 * (s(x - 1, y) + s(x + 1, y)) + 0.25 * lap_h;
      const double gv = 0.5 * (s(x, y - 1) + s(x, y + 1)) + 0.25 * lap_v;
      double g;
      if (dh < dv)
        g = gh;
      else if (dv < dh)
        g = gv;
      else
        g = 0.5 * (gh + gv);
      green(x, y) = std::clamp(g, 0.0, 1.0);
    }
  RasterImage out(W, H, 3);
  out.set_channel(G, green);
  for (int c : {R, B}) {
    Plane diff(W, H);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        if (m.color(x, y) == c) diff(x, y) = s(x, y) - green(x, y);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        if (m.color(x, y) == c) {
          out.at(x, y, c) = s(x, y);
          continue;
        }
        double d;
        if (m.color(x, y) == G) {
          d = neighbour_mean(diff, m, x, y, c);
        } else {
          // Opposite chroma site: the four diagonals carry colour c.
          d = neighbour_mean(diff, m, x, y, c);
        }
        out.at(x, y, c) = std::clamp(green(x, y) + d, 0.0, 1.0);
      }
  }
  return out;
}

}  // namespace

RasterImage demosaic(const BayerMosaic& m, DemosaicerId id) {
  switch (id) {
    case DemosaicerId::bilinear: return bilinear(m);
    case DemosaicerId::gradient_corrected: return gradient_corrected(m);
    case DemosaicerId::edge_directed: return edge_directed(m);
  }
  throw ArgumentError("unknown demosaicer");
}

RasterImage blend(std::span<const RasterImage> outputs, const ParameterField& field) {
  if (outputs.size() < 2) throw ArgumentError("blending needs at least two outputs");
  if (static_cast<std::size_t>(field.params()) != outputs.size())
    throw ArgumentError("blend field P differs from the number of outputs");
  const RasterImage& first = outputs[0];
  for (const auto& o : outputs)
    if (!o.same_shape(first)) throw ArgumentError("blend inputs differ in shape");
  if (field.width() != first.width() || field.height() != first.height())
    throw ArgumentError("blend field does not match the images");
  const int P = field.params();
  RasterImage out(first.width(), first.height(), first.channels());
  std::vector<double> w(P);
  for (int y = 0; y < first.height(); ++y)
    for (int x = 0; x < first.width(); ++x) {
      const std::size_t pix = static_cast<std::size_t>(y) * first.width() + x;
      double sum = 0.0;
      for (int k = 0; k < P; ++k) sum += field.at(pix, k);
      for (int k = 0; k < P; ++k) w[k] = sum < 1e-12 ? 1.0 / P : field.at(pix, k) / sum;
      for (int c = 0; c < first.channels(); ++c) {
        double acc = 0.0;
        for (int k = 0; k < P; ++k) acc += w[k] * outputs[k].at(x, y, c);
        out.at(x, y, c) = acc;
      }
    }
  out.clamp();
  return out;
}

RasterImage blend_adaptive(const BayerMosaic& m, const ParamMapperModel& model,
                           std::span<const RasterImage> outputs) {
  if (model.processor != ProcessorKind::blend) throw ArgumentError("model is not a blending model");
  if (static_cast<std::size_t>(model.param_count()) != outputs.size())
    throw ArgumentError("model P differs from the number of demosaicers");
  const FeatureMap fm = build_feature_map(m, model.feature_spec);
  return blend(outputs, map_field(fm, model));
}

RasterImage blend_adaptive(const BayerMosaic& m, const ParamMapperModel& model,
                           std::span<const DemosaicerId> ids) {
  std::vector<RasterImage> outputs;
  for (auto id : ids) outputs.push_back(demosaic(m, id));
  return blend_adaptive(m, model, outputs);
}

RasterImage blend_map_image(const ParameterField& field) {
  if (field.params() > 3) throw ArgumentError("blend map export supports at most 3 weights");
  RasterImage img(field.width(), field.height(), 3, 0.0);
  const int P = field.params();
  for (std::size_t pix = 0; pix < field.pixel_count(); ++pix) {
    double sum = 0.0;
    for (int k = 0; k < P; ++k) sum += field.at(pix, k);
    const int x = static_cast<int>(pix % field.width()), y = static_cast<int>(pix / field.width());
    for (int k = 0; k < P; ++k) img.at(x, y, k) = sum < 1e-12 ? 1.0 / P : field.at(pix, k) / sum;
  }
  return img;
}

void export_blend_map(const ParameterField& field, const std::filesystem::path& path) {
  save_image(blend_map_image(field), path, 16);
}

std::vector<ParamSpec> blend_param_specs(std::size_t count) {
  std::vector<ParamSpec> specs;
  for (std::size_t k = 0; k < count; ++k)
    specs.push_back({"weight" + std::to_string(k), 0.0, 1.0, Discreteness::none, CoefficientBlock(1)});
  return specs;
}

}  // namespace adaptune
