#include "adaptune/simd/kernels.hpp"

namespace adaptune::simd {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void sq_diff_accumulate_scalar(const double* a, const double* b, double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc[i] += d * d;
  }
}

void multiply_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int l = 0; l < 4; ++l) {
      const double d = a[i + l] - b[i + l];
      lane[l] += d * d;
    }
  for (int l = 0; i < n; ++i, ++l) {
    const double d = a[i] - b[i];
    lane[l] += d * d;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_scalar(const double* a, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int l = 0; l < 4; ++l) lane[l] += a[i + l];
  for (int l = 0; i < n; ++i, ++l) lane[l] += a[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{Isa::scalar,         "scalar",           axpy_scalar,
                                 sq_diff_accumulate_scalar, multiply_scalar, sum_sq_diff_scalar,
                                 sum_scalar};
  return table;
}

}  // namespace adaptune::simd
