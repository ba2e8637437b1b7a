#include <atomic>
#include <cstdlib>
#include <string_view>

#include "adaptune/simd/kernels.hpp"

namespace adaptune::simd {

const KernelTable* avx2_kernels_impl() noexcept;

namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* initial_choice() noexcept {
  if (const char* env = std::getenv("ADAPTUNE_SIMD"); env && std::string_view(env) == "scalar")
    return &scalar_kernels();
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_choice()};
  return table;
}

}  // namespace

const KernelTable* avx2_kernels() noexcept { return cpu_has_avx2() ? avx2_kernels_impl() : nullptr; }

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

bool select(Isa isa) noexcept {
  const KernelTable* t = isa == Isa::avx2 ? avx2_kernels() : &scalar_kernels();
  if (!t) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace adaptune::simd
