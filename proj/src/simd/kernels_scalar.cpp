#include <algorithm>

#include "heatplan/simd/kernels.hpp"

namespace heatplan::simd {
namespace {

void correlate_row_scalar(const double* base, const std::ptrdiff_t* offsets,
                          const double* weights, std::size_t taps, double* out,
                          std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < taps; ++k) {
      acc += weights[k] * base[offsets[k] + static_cast<std::ptrdiff_t>(j)];
    }
    out[j] = acc;
  }
}

void max_or_complement_scalar(const double* a, const double* b, const double* c,
                              double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = std::max(std::max(a[j], b[j]), 1.0 - c[j]);
  }
}

void scale_row_scalar(float scale, const float* row, float* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = scale * row[j];
  }
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{Isa::kScalar, &correlate_row_scalar, &max_or_complement_scalar,
                               &scale_row_scalar};
}  // namespace detail

}  // namespace heatplan::simd
