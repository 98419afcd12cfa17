#pragma once

#include <cstddef>
#include <string_view>

namespace spherefield::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

// Inner loops of the sweep, cost filtering and metrics. Every entry has a
// scalar reference and may have a vector variant; the variants agree to
// float rounding (see the equivalence tests).
struct Kernels {
  // mean_i |ref_i - (w00 p00_i + w01 p01_i + w10 p10_i + w11 p11_i)|
  float (*bilinear_l1)(const float* ref, const float* p00, const float* p01, const float* p10, const float* p11,
                       float w00, float w01, float w10, float w11, std::size_t n);
  // acc_i += src_i, elementwise in double (bit-identical across variants).
  void (*accumulate)(double* acc, const float* src, std::size_t n);
  // dst_i = float(acc_i * scale), bit-identical across variants.
  void (*store_scaled)(float* dst, const double* acc, double scale, std::size_t n);
  // sum_i (a_i - b_i)^2 in double.
  double (*squared_error_sum)(const float* a, const float* b, std::size_t n);
};

const Kernels& scalar_kernels();
#if defined(SPHEREFIELD_WITH_AVX2)
const Kernels& avx2_kernels();
#endif

bool isa_available(Isa isa);

// Best available ISA, unless SPHEREFIELD_ISA=scalar|avx2 says otherwise.
Isa active_isa();
void set_active_isa(Isa isa);  // throws InvalidParam if unavailable
const Kernels& kernels_for(Isa isa);
const Kernels& kernels();

}  // namespace spherefield::simd
