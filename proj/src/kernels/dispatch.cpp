#include <cstdlib>
#include <string_view>

#include "eitsim/kernels.hpp"

namespace eitsim::kernels {

#if defined(EITSIM_HAVE_AVX2_TU)
const KernelTable* avx2_table_unchecked() noexcept;
#endif

const KernelTable* avx2_table() noexcept {
#if defined(EITSIM_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("EITSIM_SIMD");
    if (env && std::string_view(env) == "scalar") return &scalar_table();
    if (const KernelTable* t = avx2_table()) return t;
    return &scalar_table();
  }();
  return *chosen;
}

}  // namespace eitsim::kernels
