#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace oracle {

namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

double sample(const RasterImage& img, int x, int y, int c) {
  return img.at(reflect(x, img.width()), reflect(y, img.height()), c);
}

}  // namespace

RasterImage random_image(int w, int h, int c, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  RasterImage img(w, h, c);
  for (double& v : img.samples()) v = u(rng);
  return img;
}

Plane random_plane(int w, int h, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Plane p(w, h);
  for (double& v : p.values) v = u(rng);
  return p;
}

std::vector<Match> neighbours(const RasterImage& img, int x, int y, int patch, int radius, int n) {
  const int h = patch / 2;
  std::vector<Match> all;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const int cx = x + dx, cy = y + dy;
      if (cx < 0 || cy < 0 || cx >= img.width() || cy >= img.height()) continue;
      double d2 = 0.0;
      for (int c = 0; c < img.channels(); ++c)
        for (int v = -h; v <= h; ++v)
          for (int u = -h; u <= h; ++u) {
            const double d = sample(img, x + u, y + v, c) - sample(img, cx + u, cy + v, c);
            d2 += d * d;
          }
      all.push_back({dx, dy, d2});
    }
  std::stable_sort(all.begin(), all.end(), [](const Match& a, const Match& b) { return a.d2 < b.d2; });
  all.resize(std::min<std::size_t>(all.size(), n));
  return all;
}

RasterImage anlm(const RasterImage& img, int p0, double p1, double sigma, int n, int radius,
                 adaptune::Aggregation aggregation) {
  const int W = img.width(), H = img.height(), C = img.channels();
  const int h = p0 / 2;
  RasterImage acc(W, H, C, 0.0);
  std::vector<double> count(static_cast<std::size_t>(W) * H, 0.0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const auto nb = neighbours(img, x, y, p0, radius, n);
      std::vector<double> w;
      double wsum = 0.0;
      for (const auto& m : nb) {
        double e = m.d2 / (double(p0) * p0 * C) - 2.0 * sigma * sigma;
        if (e < 0.0) e = 0.0;
        const double wj = std::exp(-e / ((p1 * sigma) * (p1 * sigma)));
        w.push_back(wj);
        wsum += wj;
      }
      if (aggregation == adaptune::Aggregation::center_pixel) {
        for (int c = 0; c < C; ++c) {
          double v = 0.0;
          for (std::size_t j = 0; j < nb.size(); ++j) v += w[j] / wsum * img.at(x + nb[j].dx, y + nb[j].dy, c);
          acc.at(x, y, c) = v;
        }
        count[static_cast<std::size_t>(y) * W + x] = 1.0;
        continue;
      }
      for (int ty = -h; ty <= h; ++ty)
        for (int tx = -h; tx <= h; ++tx) {
          const int ox = x + tx, oy = y + ty;
          if (ox < 0 || oy < 0 || ox >= W || oy >= H) continue;
          for (int c = 0; c < C; ++c) {
            double v = 0.0;
            for (std::size_t j = 0; j < nb.size(); ++j)
              v += w[j] / wsum * sample(img, x + nb[j].dx + tx, y + nb[j].dy + ty, c);
            acc.at(ox, oy, c) += v;
          }
          count[static_cast<std::size_t>(oy) * W + ox] += 1.0;
        }
    }
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const double v = acc.at(x, y, c) / count[static_cast<std::size_t>(y) * W + x];
        acc.at(x, y, c) = std::clamp(v, 0.0, 1.0);
      }
  return acc;
}

double ssim(const RasterImage& a, const RasterImage& b) {
  const double c1 = 0.0001, c2 = 0.0009;
  double win[11][11];
  double total = 0.0;
  for (int j = 0; j < 11; ++j)
    for (int i = 0; i < 11; ++i) {
      const double di = i - 5, dj = j - 5;
      win[j][i] = std::exp(-(di * di + dj * dj) / (2.0 * 1.5 * 1.5));
      total += win[j][i];
    }
  double result = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    double s = 0.0;
    int count = 0;
    for (int y = 0; y + 11 <= a.height(); ++y)
      for (int x = 0; x + 11 <= a.width(); ++x) {
        double ma = 0, mb = 0;
        for (int j = 0; j < 11; ++j)
          for (int i = 0; i < 11; ++i) {
            ma += win[j][i] / total * a.at(x + i, y + j, c);
            mb += win[j][i] / total * b.at(x + i, y + j, c);
          }
        double va = 0, vb = 0, cov = 0;
        for (int j = 0; j < 11; ++j)
          for (int i = 0; i < 11; ++i) {
            const double da = a.at(x + i, y + j, c) - ma, db = b.at(x + i, y + j, c) - mb;
            va += win[j][i] / total * da * da;
            vb += win[j][i] / total * db * db;
            cov += win[j][i] / total * da * db;
          }
        s += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    result += s / count;
  }
  return result / a.channels();
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = f(x);
    x[i] = keep - h;
    const double fm = f(x);
    x[i] = keep;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

std::pair<double, double> decile_means(const std::vector<double>& key, const std::vector<double>& values,
                                       double fraction) {
  std::vector<std::size_t> idx(key.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(key.size() * fraction));
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lo += values[idx[i]];
    hi += values[idx[idx.size() - 1 - i]];
  }
  return {lo / n, hi / n};
}

}  // namespace oracle
