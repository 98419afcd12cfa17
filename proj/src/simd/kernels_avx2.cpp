#include <immintrin.h>

#include <cmath>

#include "spherefield/simd/kernels.hpp"

namespace spherefield::simd {

namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d hi64 = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, hi64));
}

float bilinear_l1(const float* ref, const float* p00, const float* p01, const float* p10, const float* p11, float w00,
                  float w01, float w10, float w11, std::size_t n) {
  const __m256 v00 = _mm256_set1_ps(w00);
  const __m256 v01 = _mm256_set1_ps(w01);
  const __m256 v10 = _mm256_set1_ps(w10);
  const __m256 v11 = _mm256_set1_ps(w11);
  const __m256 abs_mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 b = _mm256_mul_ps(v00, _mm256_loadu_ps(p00 + i));
    b = _mm256_fmadd_ps(v01, _mm256_loadu_ps(p01 + i), b);
    b = _mm256_fmadd_ps(v10, _mm256_loadu_ps(p10 + i), b);
    b = _mm256_fmadd_ps(v11, _mm256_loadu_ps(p11 + i), b);
    const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(ref + i), b);
    acc = _mm256_add_ps(acc, _mm256_and_ps(d, abs_mask));
  }
  float sum = hsum(acc);
  for (; i < n; ++i) {
    const float blended = w00 * p00[i] + w01 * p01[i] + w10 * p10[i] + w11 * p11[i];
    sum += std::fabs(ref[i] - blended);
  }
  return n ? sum / static_cast<float>(n) : 0.0f;
}

void accumulate(double* acc, const float* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_cvtps_pd(_mm_loadu_ps(src + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), s));
  }
  for (; i < n; ++i) acc[i] += static_cast<double>(src[i]);
}

void store_scaled(float* dst, const double* acc, double scale, std::size_t n) {
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm_storeu_ps(dst + i, _mm256_cvtpd_ps(_mm256_mul_pd(_mm256_loadu_pd(acc + i), s)));
  }
  for (; i < n; ++i) dst[i] = static_cast<float>(acc[i] * scale);
}

double squared_error_sum(const float* a, const float* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + i)), _mm256_cvtps_pd(_mm_loadu_ps(b + i)));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double sum = hsum(acc);
  for (; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum;
}

}  // namespace

const Kernels& avx2_kernels() {
  static const Kernels k{bilinear_l1, accumulate, store_scaled, squared_error_sum};
  return k;
}

}  // namespace spherefield::simd
