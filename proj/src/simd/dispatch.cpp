#include <cstdlib>
#include <stdexcept>
#include <string>

#include "heatplan/simd/kernels.hpp"

namespace heatplan::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(HEATPLAN_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("SIMD variant not available: " + std::string(isa_name(isa)));
  }
#if defined(HEATPLAN_HAVE_AVX2)
  if (isa == Isa::kAvx2) return detail::kAvx2Table;
#endif
  return detail::kScalarTable;
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("HEATPLAN_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return kernels_for(Isa::kScalar);
    if (want == "avx2" && isa_supported(Isa::kAvx2)) return kernels_for(Isa::kAvx2);
  }
  if (isa_supported(Isa::kAvx2)) return kernels_for(Isa::kAvx2);
  return kernels_for(Isa::kScalar);
}

}  // namespace

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace heatplan::simd
