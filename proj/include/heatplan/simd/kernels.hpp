#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace heatplan::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

/// Function table for the data-parallel grid loops. Every entry has a scalar
/// reference and may have a vectorized variant; all variants produce the same
/// results up to floating-point contraction (fused multiply-add).
struct KernelTable {
  Isa isa;

  /// out[j] = sum_k weights[k] * base[offsets[k] + j] for j in [0, n).
  /// Taps are accumulated in order k = 0..taps-1 for every j.
  void (*correlate_row)(const double* base, const std::ptrdiff_t* offsets,
                        const double* weights, std::size_t taps, double* out,
                        std::size_t n);

  /// out[j] = max(a[j], b[j], 1 - c[j]).
  void (*max_or_complement)(const double* a, const double* b, const double* c,
                            double* out, std::size_t n);

  /// out[j] = scale * row[j] (float planes, used by separable renderers).
  void (*scale_row)(float scale, const float* row, float* out, std::size_t n);
};

bool isa_supported(Isa isa);

/// Table for a specific ISA. Throws std::invalid_argument when the ISA was
/// not compiled in or is not supported by this CPU.
const KernelTable& kernels_for(Isa isa);

/// Table chosen at first use: the widest supported ISA, overridable with
/// HEATPLAN_SIMD=scalar|avx2.
const KernelTable& kernels();

namespace detail {
extern const KernelTable kScalarTable;
#if defined(HEATPLAN_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

}  // namespace heatplan::simd
