#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "adaptune/image.hpp"
#include "adaptune/image_io.hpp"
#include "adaptune/synthesis.hpp"
#include "../support/oracles.hpp"

using namespace adaptune;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "adaptune_unit";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

}  // namespace

TEST_CASE("mirror index reflects without repeating the edge") {
  CHECK(mirror_index(-1, 5) == 1);
  CHECK(mirror_index(-2, 5) == 2);
  CHECK(mirror_index(5, 5) == 3);
  CHECK(mirror_index(6, 5) == 2);
  CHECK(mirror_index(0, 1) == 0);
  CHECK(mirror_index(-7, 1) == 0);
  CHECK(mirror_index(13, 5) == 3);
  for (int i = -20; i < 20; ++i) CHECK((mirror_index(i, 6) - i) % 2 == 0);
}

TEST_CASE("raster image shape and contracts") {
  RasterImage img(4, 3, 3, 0.5);
  CHECK(img.samples().size() == 36);
  CHECK_THROWS_AS(RasterImage(4, 3, 2), ArgumentError);
  CHECK_THROWS_AS(RasterImage(0, 3, 1), ArgumentError);
  img.at(1, 2, 1) = 2.0;
  img.at(0, 0, 0) = -1.0;
  img.clamp();
  CHECK(img.at(1, 2, 1) == 1.0);
  CHECK(img.at(0, 0, 0) == 0.0);
  const RasterImage c = img.crop(1, 1, 2, 2);
  CHECK(c.width() == 2);
  CHECK(c.at(0, 1, 1) == 1.0);
  CHECK_THROWS_AS(img.crop(3, 0, 2, 2), ArgumentError);
}

TEST_CASE("load 8-bit gray pgm normalizes codes") {
  const auto p = temp_path("gray.pgm");
  write_bytes(p, std::string("P5\n2 2\n255\n") + std::string("\x00\xff\x80\x40", 4));
  const RasterImage img = load_image(p);
  REQUIRE(img.channels() == 1);
  CHECK(img.at(0, 0) == 0.0);
  CHECK(img.at(1, 0) == 1.0);
  CHECK(img.at(0, 1) == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
  CHECK(img.at(1, 1) == doctest::Approx(64.0 / 255.0).epsilon(1e-15));
}

TEST_CASE("truncated and missing files raise io errors naming the path") {
  const auto p = temp_path("short.pgm");
  write_bytes(p, std::string("P5\n4 4\n255\n") + std::string("\x01\x02", 2));
  CHECK_THROWS_AS(load_image(p), IoError);
  try {
    load_image(temp_path("missing.png"));
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("missing.png") != std::string::npos);
  }
  const auto png = temp_path("broken.png");
  write_bytes(png, std::string("\x89PNG\r\n\x1a\n\x00\x00", 10));
  CHECK_THROWS_AS(load_image(png), IoError);
}

TEST_CASE("8-bit quantization rounds half away from zero") {
  RasterImage img(3, 1, 1);
  img.at(0, 0) = 0.5;
  img.at(1, 0) = 0.0;
  img.at(2, 0) = 1.0;
  const auto p = temp_path("q.pgm");
  save_image(img, p, 8);
  std::ifstream in(p, std::ios::binary);
  std::string all((std::istreambuf_iterator<char>(in)), {});
  const std::string data = all.substr(all.size() - 3);
  CHECK(static_cast<unsigned char>(data[0]) == 128);
  CHECK(static_cast<unsigned char>(data[1]) == 0);
  CHECK(static_cast<unsigned char>(data[2]) == 255);
}

TEST_CASE("16-bit round trips stay within one code") {
  const RasterImage img = oracle::random_image(7, 5, 3, 3);
  for (const char* name : {"rt.png", "rt.ppm"}) {
    const auto p = temp_path(name);
    save_image(img, p, 16);
    const RasterImage back = load_image(p);
    REQUIRE(back.same_shape(img));
    for (std::size_t i = 0; i < img.samples().size(); ++i)
      CHECK(std::abs(back.samples()[i] - img.samples()[i]) <= 1.0 / 65535.0);
  }
}

TEST_CASE("rgb files are interleaved on disk and planar in memory") {
  RasterImage img(2, 1, 3, 0.0);
  img.at(0, 0, 0) = 1.0;
  img.at(1, 0, 2) = 1.0;
  const auto p = temp_path("rgb.ppm");
  save_image(img, p, 8);
  std::ifstream in(p, std::ios::binary);
  std::string all((std::istreambuf_iterator<char>(in)), {});
  const std::string data = all.substr(all.size() - 6);
  CHECK(data == std::string("\xff\x00\x00\x00\x00\xff", 6));
  const RasterImage back = load_image(p);
  CHECK(back == img);
  const auto png = temp_path("rgb.png");
  save_image(img, png, 8);
  CHECK(load_image(png) == img);
}

TEST_CASE("grayscale conversion") {
  RasterImage white(1, 1, 3, 1.0);
  CHECK(to_grayscale(white).at(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  RasterImage red(1, 1, 3, 0.0);
  red.at(0, 0, 0) = 1.0;
  CHECK(to_grayscale(red).at(0, 0) == doctest::Approx(0.299).epsilon(1e-15));
  const RasterImage gray = oracle::random_image(4, 4, 1, 5);
  CHECK(to_grayscale(gray) == gray);
}

TEST_CASE("gaussian noise") {
  const RasterImage img = oracle::random_image(8, 8, 3, 1);
  CHECK(add_gaussian_noise(img, 0.0, 9) == img);
  CHECK(add_gaussian_noise(img, 0.1, 9) == add_gaussian_noise(img, 0.1, 9));
  CHECK(!(add_gaussian_noise(img, 0.1, 9) == add_gaussian_noise(img, 0.1, 10)));
  const RasterImage mid(256, 256, 1, 0.5);
  const RasterImage noisy = add_gaussian_noise(mid, 20.0 / 255.0, 42);
  double m = 0.0, s = 0.0;
  for (double v : noisy.samples()) m += v;
  m /= noisy.samples().size();
  for (double v : noisy.samples()) s += (v - m) * (v - m);
  s = std::sqrt(s / noisy.samples().size());
  CHECK(std::abs(s - 20.0 / 255.0) < 0.05 * 20.0 / 255.0);
  for (double v : noisy.samples()) CHECK_UNARY(v >= 0.0 && v <= 1.0);
}

TEST_CASE("poisson noise") {
  const RasterImage zero(16, 16, 1, 0.0);
  CHECK(add_poisson_noise(zero, 1024, 3) == zero);
  const RasterImage img = oracle::random_image(8, 8, 1, 2);
  CHECK(add_poisson_noise(img, 1024, 5) == add_poisson_noise(img, 1024, 5));

  const RasterImage half(400, 400, 1, 0.5);
  const RasterImage n = add_poisson_noise(half, 1024, 11);
  double m = 0.0, v = 0.0;
  for (double x : n.samples()) m += x;
  m /= n.samples().size();
  for (double x : n.samples()) v += (x - m) * (x - m);
  v /= n.samples().size() - 1;
  const double se = std::sqrt(0.5 / 1024.0 / n.samples().size());
  CHECK(std::abs(m - 0.5) < 3 * se);
  CHECK(std::sqrt(v) == doctest::Approx(std::sqrt(0.5 / 1024.0)).epsilon(0.02));

  const RasterImage small(64, 64, 1, 0.004);  // mean 4.1 photons: inversion branch
  const RasterImage ns = add_poisson_noise(small, 1024, 12);
  double ms = 0.0;
  for (double x : ns.samples()) ms += x;
  ms /= ns.samples().size();
  CHECK(std::abs(ms - 0.004) < 3 * std::sqrt(0.004 / 1024.0 / ns.samples().size()));
}

TEST_CASE("unit-intensity poisson samples have std 1/32 before clamping") {
  // Draws above 1 are clamped; E[max(0, 1 - X)] = std / sqrt(2 pi).
  const RasterImage one(256, 256, 1, 1.0);
  const RasterImage n = add_poisson_noise(one, 1024, 21);
  double below = 0.0;
  for (double x : n.samples()) below += 1.0 - x;
  below /= n.samples().size();
  CHECK(below == doctest::Approx(1.0 / 32.0 * std::sqrt(2.0 / M_PI) / 2.0).epsilon(0.05));
}

TEST_CASE("gaussian kernel") {
  const BlurKernel k1 = gaussian_kernel(1, 2.0);
  CHECK(k1.side() == 1);
  CHECK(k1.at(0, 0) == 1.0);
  for (int side : {3, 5, 7, 9})
    for (double sigma : {0.5, 1.0, 2.0, 5.0}) {
      const BlurKernel k = gaussian_kernel(side, sigma);
      double s = 0.0;
      for (double w : k.weights()) s += w;
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  const BlurKernel k = gaussian_kernel(7, 2.0);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 7; ++x) {
      CHECK(k.at(x, y) == k.at(6 - x, y));
      CHECK(k.at(x, y) == k.at(x, 6 - y));
      CHECK(k.at(x, y) == k.at(y, x));
    }
  CHECK_THROWS_AS(gaussian_kernel(4, 1.0), ArgumentError);
  CHECK_THROWS_AS(BlurKernel(3, {1, 1, 1, 1, 1, 1, 1, 1, 1}), ArgumentError);
  CHECK_THROWS_AS(BlurKernel(1, {-1.0}), ArgumentError);
}

TEST_CASE("convolution") {
  const RasterImage img = oracle::random_image(9, 7, 3, 4);
  CHECK(convolve(img, BlurKernel::identity()) == img);
  const RasterImage flat(9, 7, 1, 0.37);
  const RasterImage cf = convolve(flat, gaussian_kernel(7, 2.0));
  for (double v : cf.samples()) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));

  // Impulse response centre equals the sampled, renormalized Gaussian at 0.
  RasterImage imp(15, 15, 1, 0.0);
  imp.at(7, 7) = 1.0;
  double norm = 0.0;
  for (int y = -3; y <= 3; ++y)
    for (int x = -3; x <= 3; ++x) norm += std::exp(-(x * x + y * y) / 8.0);
  CHECK(convolve(imp, gaussian_kernel(7, 2.0)).at(7, 7) == doctest::Approx(1.0 / norm).epsilon(1e-12));

  // Linearity before clamping.
  const Plane a = oracle::random_plane(10, 8, 7), b = oracle::random_plane(10, 8, 8);
  Plane mix(10, 8);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.values[i] = 0.3 * a.values[i] - 1.7 * b.values[i];
  const BlurKernel k = gaussian_kernel(5, 1.3);
  const Plane ca = correlate(a, k), cb = correlate(b, k), cm = correlate(mix, k);
  for (std::size_t i = 0; i < mix.size(); ++i)
    CHECK(std::abs(cm.values[i] - (0.3 * ca.values[i] - 1.7 * cb.values[i])) < 1e-10);
}

TEST_CASE("correlation adjoint") {
  const BlurKernel k(3, {0.05, 0.1, 0.05, 0.2, 0.3, 0.1, 0.05, 0.1, 0.05});
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Plane a = oracle::random_plane(6, 5, seed, -1, 1), b = oracle::random_plane(6, 5, seed + 50, -1, 1);
    const Plane ka = correlate(a, k), ktb = correlate_adjoint(b, k);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      lhs += ka.values[i] * b.values[i];
      rhs += a.values[i] * ktb.values[i];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("mosaic layouts") {
  const RasterImage gray(4, 4, 3, 0.3);
  const BayerMosaic gm = mosaic(gray, CfaLayout::GRBG);
  for (double v : gm.image().samples()) CHECK(v == 0.3);
  RasterImage img(2, 2, 3);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) img.at(x, y, c) = 0.1 * (c + 1);
  const BayerMosaic m = mosaic(img, CfaLayout::RGGB);
  CHECK(m.color(0, 0) == 0);
  CHECK(m.color(1, 0) == 1);
  CHECK(m.color(0, 1) == 1);
  CHECK(m.color(1, 1) == 2);
  CHECK(m.at(0, 0) == 0.1);
  CHECK(m.at(1, 1) == doctest::Approx(0.3));
  CHECK(cfa_color(CfaLayout::BGGR, 0, 0) == 2);
  CHECK(cfa_color(CfaLayout::GBRG, 0, 1) == 0);
  CHECK(parse_cfa("GBRG") == CfaLayout::GBRG);
  CHECK_THROWS_AS(parse_cfa("RGBG"), ArgumentError);
  CHECK_THROWS_AS(mosaic(RasterImage(3, 2, 3), CfaLayout::RGGB), ArgumentError);
  CHECK_THROWS_AS(mosaic(RasterImage(2, 2, 1), CfaLayout::RGGB), ArgumentError);
}

TEST_CASE("kernel files round trip") {
  const BlurKernel k = gaussian_kernel(5, 1.1);
  const auto p = temp_path("k.txt");
  save_kernel(k, p);
  const BlurKernel back = load_kernel(p);
  REQUIRE(back.side() == 5);
  for (int i = 0; i < 25; ++i) CHECK(back.weights()[i] == doctest::Approx(k.weights()[i]).epsilon(1e-15));
  write_bytes(p, "3\n1 2 1\n2 4 2\n1 2");
  CHECK_THROWS(load_kernel(p));
}
