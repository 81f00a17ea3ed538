// AVX2 + FMA variants. This file is compiled with -mavx2 -mfma and only
// reached through the dispatch table after a CPU feature check.

#if defined(HEATPLAN_HAVE_AVX2)

#include <immintrin.h>

#include <algorithm>

#include "heatplan/simd/kernels.hpp"

namespace heatplan::simd {
namespace {

void correlate_row_avx2(const double* base, const std::ptrdiff_t* offsets,
                        const double* weights, std::size_t taps, double* out,
                        std::size_t n) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    for (std::size_t k = 0; k < taps; ++k) {
      const __m256d w = _mm256_set1_pd(weights[k]);
      const double* src = base + offsets[k] + static_cast<std::ptrdiff_t>(j);
      acc0 = _mm256_fmadd_pd(w, _mm256_loadu_pd(src), acc0);
      acc1 = _mm256_fmadd_pd(w, _mm256_loadu_pd(src + 4), acc1);
    }
    _mm256_storeu_pd(out + j, acc0);
    _mm256_storeu_pd(out + j + 4, acc1);
  }
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < taps; ++k) {
      const double* src = base + offsets[k] + static_cast<std::ptrdiff_t>(j);
      acc = _mm256_fmadd_pd(_mm256_set1_pd(weights[k]), _mm256_loadu_pd(src), acc);
    }
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < taps; ++k) {
      acc += weights[k] * base[offsets[k] + static_cast<std::ptrdiff_t>(j)];
    }
    out[j] = acc;
  }
}

void max_or_complement_avx2(const double* a, const double* b, const double* c, double* out,
                            std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d m = _mm256_max_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j));
    const __m256d nc = _mm256_sub_pd(one, _mm256_loadu_pd(c + j));
    _mm256_storeu_pd(out + j, _mm256_max_pd(m, nc));
  }
  for (; j < n; ++j) {
    out[j] = std::max(std::max(a[j], b[j]), 1.0 - c[j]);
  }
}

void scale_row_avx2(float scale, const float* row, float* out, std::size_t n) {
  const __m256 s = _mm256_set1_ps(scale);
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    _mm256_storeu_ps(out + j, _mm256_mul_ps(s, _mm256_loadu_ps(row + j)));
  }
  for (; j < n; ++j) {
    out[j] = scale * row[j];
  }
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{Isa::kAvx2, &correlate_row_avx2, &max_or_complement_avx2,
                             &scale_row_avx2};
}  // namespace detail

}  // namespace heatplan::simd

#endif  // HEATPLAN_HAVE_AVX2
