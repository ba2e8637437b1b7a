// Compiled with -mavx2 (and deliberately without -mfma): multiply and add stay
// separate roundings so results match the scalar reference exactly.
#include "adaptune/simd/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

namespace adaptune::simd {
namespace {

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void sq_diff_accumulate_avx2(const double* a, const double* b, double* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_mul_pd(d, d)));
  }
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc[i] += d * d;
  }
}

void multiply_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

double reduce_lanes(__m256d v, std::size_t i, std::size_t n, const double* tail_a,
                    const double* tail_b) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, v);
  for (int l = 0; i < n; ++i, ++l) {
    const double d = tail_b ? tail_a[i] - tail_b[i] : tail_a[i];
    lane[l] += tail_b ? d * d : d;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  return reduce_lanes(acc, i, n, a, b);
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  return reduce_lanes(acc, i, n, a, nullptr);
}

}  // namespace

const KernelTable* avx2_kernels_impl() noexcept {
  static const KernelTable table{Isa::avx2,     "avx2",           axpy_avx2, sq_diff_accumulate_avx2,
                                 multiply_avx2, sum_sq_diff_avx2, sum_avx2};
  return &table;
}

}  // namespace adaptune::simd

#else

namespace adaptune::simd {
const KernelTable* avx2_kernels_impl() noexcept { return nullptr; }
}  // namespace adaptune::simd

#endif
