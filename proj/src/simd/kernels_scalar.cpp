#include <cmath>

#include "spherefield/simd/kernels.hpp"

namespace spherefield::simd {

namespace {

float bilinear_l1(const float* ref, const float* p00, const float* p01, const float* p10, const float* p11, float w00,
                  float w01, float w10, float w11, std::size_t n) {
  float sum = 0.0f;
  for (std::size_t i = 0; i < n; ++i) {
    const float blended = w00 * p00[i] + w01 * p01[i] + w10 * p10[i] + w11 * p11[i];
    sum += std::fabs(ref[i] - blended);
  }
  return n ? sum / static_cast<float>(n) : 0.0f;
}

void accumulate(double* acc, const float* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += static_cast<double>(src[i]);
}

void store_scaled(float* dst, const double* acc, double scale, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(acc[i] * scale);
}

double squared_error_sum(const float* a, const float* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum;
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{bilinear_l1, accumulate, store_scaled, squared_error_sum};
  return k;
}

}  // namespace spherefield::simd
