#pragma once
// Data-parallel inner loops used by the filters and metrics.
//
// Every kernel exists as a scalar reference and, on x86-64, an AVX2 variant
// selected once at runtime. Elementwise kernels perform the same IEEE
// operations per element in both variants. Reductions accumulate into four
// interleaved lanes (element i goes to lane i % 4) and combine them as
// (l0 + l1) + (l2 + l3), so the AVX2 variant reproduces the scalar result
// bit for bit. Set ADAPTUNE_SIMD=scalar to force the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace adaptune::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;
  /// y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// acc[i] += (a[i] - b[i])^2
  void (*sq_diff_accumulate)(const double* a, const double* b, double* acc, std::size_t n);
  /// out[i] = a[i] * b[i]
  void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
  /// sum_i (a[i] - b[i])^2, lane-blocked order
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  /// sum_i a[i], lane-blocked order
  double (*sum)(const double* a, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;
/// nullptr when the build or the CPU lacks AVX2.
const KernelTable* avx2_kernels() noexcept;

/// The table used by the library.
const KernelTable& active() noexcept;
/// Override the runtime choice; returns false if `isa` is unavailable.
bool select(Isa isa) noexcept;

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline void sq_diff_accumulate(std::span<const double> a, std::span<const double> b,
                               std::span<double> acc) {
  active().sq_diff_accumulate(a.data(), b.data(), acc.data(), acc.size());
}
inline void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  active().multiply(a.data(), b.data(), out.data(), out.size());
}
inline double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  return active().sum_sq_diff(a.data(), b.data(), a.size());
}
inline double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }

}  // namespace adaptune::simd
