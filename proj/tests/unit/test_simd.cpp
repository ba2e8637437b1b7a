#include <vector>

#include "doctest.h"
#include "adaptune/metrics.hpp"
#include "adaptune/anlm.hpp"
#include "adaptune/synthesis.hpp"
#include "adaptune/simd/kernels.hpp"
#include "../support/oracles.hpp"

using namespace adaptune;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  const Plane p = oracle::random_plane(static_cast<int>(n), 1, seed, -2, 2);
  return p.values;
}

struct IsaGuard {
  ~IsaGuard() { simd::select(simd::avx2_kernels() ? simd::Isa::avx2 : simd::Isa::scalar); }
};

}  // namespace

TEST_CASE("scalar and avx2 kernels are bit-identical") {
  const simd::KernelTable* avx = simd::avx2_kernels();
  if (!avx) {
    MESSAGE("AVX2 unavailable; only the scalar path is exercised");
    return;
  }
  const simd::KernelTable& sc = simd::scalar_kernels();
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 31u, 64u, 1001u}) {
    const auto a = random_vector(n, 1 + n), b = random_vector(n, 100 + n), c = random_vector(n, 200 + n);
    auto y1 = c, y2 = c;
    sc.axpy(0.37, a.data(), y1.data(), n);
    avx->axpy(0.37, a.data(), y2.data(), n);
    CHECK(y1 == y2);
    auto s1 = c, s2 = c;
    sc.sq_diff_accumulate(a.data(), b.data(), s1.data(), n);
    avx->sq_diff_accumulate(a.data(), b.data(), s2.data(), n);
    CHECK(s1 == s2);
    std::vector<double> m1(n), m2(n);
    sc.multiply(a.data(), b.data(), m1.data(), n);
    avx->multiply(a.data(), b.data(), m2.data(), n);
    CHECK(m1 == m2);
    CHECK(sc.sum_sq_diff(a.data(), b.data(), n) == avx->sum_sq_diff(a.data(), b.data(), n));
    CHECK(sc.sum(a.data(), n) == avx->sum(a.data(), n));
  }
}

TEST_CASE("scalar kernels match naive loops") {
  const auto a = random_vector(13, 5), b = random_vector(13, 6);
  const simd::KernelTable& sc = simd::scalar_kernels();
  double lanes[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < 13; ++i) lanes[i % 4] += (a[i] - b[i]) * (a[i] - b[i]);
  CHECK(sc.sum_sq_diff(a.data(), b.data(), 13) == (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]));
  std::vector<double> y(13, 1.0);
  sc.axpy(2.0, a.data(), y.data(), 13);
  for (std::size_t i = 0; i < 13; ++i) CHECK(y[i] == 1.0 + 2.0 * a[i]);
}

TEST_CASE("library results do not depend on the selected isa") {
  if (!simd::avx2_kernels()) return;
  IsaGuard guard;
  const RasterImage img = oracle::random_image(20, 18, 3, 77);
  const RasterImage other = oracle::random_image(20, 18, 3, 78);
  AnlmConfig cfg;
  cfg.search_radius = 4;
  cfg.neighbors = 6;
  REQUIRE(simd::select(simd::Isa::scalar));
  CHECK(simd::active().isa == simd::Isa::scalar);
  const RasterImage d_scalar = denoise_global(img, 5, 0.6, cfg);
  const double s_scalar = ssim(img, other), m_scalar = mse(img, other);
  const RasterImage c_scalar = convolve(img, gaussian_kernel(5, 1.0));
  REQUIRE(simd::select(simd::Isa::avx2));
  CHECK(simd::active().isa == simd::Isa::avx2);
  CHECK(denoise_global(img, 5, 0.6, cfg) == d_scalar);
  CHECK(ssim(img, other) == s_scalar);
  CHECK(mse(img, other) == m_scalar);
  CHECK(convolve(img, gaussian_kernel(5, 1.0)) == c_scalar);
}
