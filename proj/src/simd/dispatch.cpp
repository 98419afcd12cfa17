#include <atomic>
#include <cstdlib>
#include <string>

#include "spherefield/error.hpp"
#include "spherefield/simd/kernels.hpp"

namespace spherefield::simd {

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(SPHEREFIELD_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

namespace {

Isa detect() {
  if (const char* env = std::getenv("SPHEREFIELD_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && isa_available(Isa::Avx2)) return Isa::Avx2;
  }
  return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<int>& active_slot() {
  static std::atomic<int> slot{static_cast<int>(detect())};
  return slot;
}

}  // namespace

Isa active_isa() { return static_cast<Isa>(active_slot().load(std::memory_order_relaxed)); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) throw Error(ErrorCode::InvalidParam, std::string(isa_name(isa)) + " is not available");
  active_slot().store(static_cast<int>(isa), std::memory_order_relaxed);
}

const Kernels& kernels_for(Isa isa) {
#if defined(SPHEREFIELD_WITH_AVX2)
  if (isa == Isa::Avx2 && isa_available(Isa::Avx2)) return avx2_kernels();
#endif
  (void)isa;
  return scalar_kernels();
}

const Kernels& kernels() { return kernels_for(active_isa()); }

}  // namespace spherefield::simd
