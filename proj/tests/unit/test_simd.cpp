#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "spherefield/cost_volume.hpp"
#include "spherefield/metrics.hpp"
#include "spherefield/scene.hpp"
#include "spherefield/simd/kernels.hpp"

using namespace spherefield;

namespace {

std::vector<float> random_floats(std::mt19937& gen, std::size_t n) {
  std::uniform_real_distribution<float> d(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (float& x : v) x = d(gen);
  return v;
}

// Restores the dispatcher's choice when a test case ends.
struct IsaGuard {
  simd::Isa saved = simd::active_isa();
  ~IsaGuard() { simd::set_active_isa(saved); }
};

}  // namespace

TEST_CASE("scalar kernels match a plain loop") {
  std::mt19937 gen(1);
  const auto& k = simd::scalar_kernels();
  for (std::size_t n : {1u, 3u, 8u, 25u, 31u}) {
    const auto r = random_floats(gen, n), a = random_floats(gen, n), b = random_floats(gen, n),
               c = random_floats(gen, n), d = random_floats(gen, n);
    double want = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      want += std::abs(double(r[i]) - (0.1 * a[i] + 0.2 * b[i] + 0.3 * c[i] + 0.4 * d[i]));
    want /= n;
    CHECK(k.bilinear_l1(r.data(), a.data(), b.data(), c.data(), d.data(), 0.1f, 0.2f, 0.3f, 0.4f, n) ==
          doctest::Approx(want).epsilon(1e-5));
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) sq += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
    CHECK(k.squared_error_sum(a.data(), b.data(), n) == doctest::Approx(sq).epsilon(1e-12));
  }
}

TEST_CASE("avx2 kernels agree with scalar") {
  if (!simd::isa_available(simd::Isa::Avx2)) {
    MESSAGE("avx2 not available on this machine; equivalence test skipped");
    return;
  }
  const auto& s = simd::kernels_for(simd::Isa::Scalar);
  const auto& v = simd::kernels_for(simd::Isa::Avx2);
  CHECK(&s != &v);
  std::mt19937 gen(2);
  for (std::size_t n = 1; n <= 70; ++n) {
    const auto r = random_floats(gen, n), a = random_floats(gen, n), b = random_floats(gen, n),
               c = random_floats(gen, n), d = random_floats(gen, n);
    const float ls = s.bilinear_l1(r.data(), a.data(), b.data(), c.data(), d.data(), 0.1f, 0.2f, 0.3f, 0.4f, n);
    const float lv = v.bilinear_l1(r.data(), a.data(), b.data(), c.data(), d.data(), 0.1f, 0.2f, 0.3f, 0.4f, n);
    CHECK(std::abs(ls - lv) <= 1e-6f * std::max(1.0f, std::abs(ls)));

    std::vector<double> acc_s(n, 0.25), acc_v(n, 0.25);
    s.accumulate(acc_s.data(), a.data(), n);
    v.accumulate(acc_v.data(), a.data(), n);
    CHECK(std::memcmp(acc_s.data(), acc_v.data(), n * sizeof(double)) == 0);

    std::vector<float> out_s(n), out_v(n);
    s.store_scaled(out_s.data(), acc_s.data(), 1.0 / 7.0, n);
    v.store_scaled(out_v.data(), acc_v.data(), 1.0 / 7.0, n);
    CHECK(std::memcmp(out_s.data(), out_v.data(), n * sizeof(float)) == 0);

    const double qs = s.squared_error_sum(a.data(), b.data(), n);
    const double qv = v.squared_error_sum(a.data(), b.data(), n);
    CHECK(qs == doctest::Approx(qv).epsilon(1e-12));
  }
}

TEST_CASE("pipeline results agree across ISAs") {
  if (!simd::isa_available(simd::Isa::Avx2)) return;
  IsaGuard guard;
  const Scene scene = make_sphere_room();
  const auto a = render_gt(scene, scene.poses[0], 32, 64);
  const auto b = render_gt(scene, scene.poses[2], 32, 64);
  const FeatureMap fa = extract_features(a.color, Descriptor::ZnccPatch);
  const FeatureMap fb = extract_features(b.color, Descriptor::ZnccPatch);
  const CandidateGrid grid = uniform_grid(32, 64, merge_candidates(uniform_candidates(0.1, 10.0, 16), {}));

  simd::set_active_isa(simd::Isa::Scalar);
  const CostVolume vs = aggregate_cost(build_cost_volume(fa, fb, scene.poses[0], scene.poses[2], grid), 2);
  const double ps = psnr(a.color, b.color);
  simd::set_active_isa(simd::Isa::Avx2);
  const CostVolume vv = aggregate_cost(build_cost_volume(fa, fb, scene.poses[0], scene.poses[2], grid), 2);
  const double pv = psnr(a.color, b.color);

  float worst = 0.0f;
  for (std::size_t i = 0; i < vs.cost.size(); ++i) worst = std::max(worst, std::abs(vs.cost[i] - vv.cost[i]));
  CHECK(worst < 1e-5f);
  CHECK(ps == doctest::Approx(pv).epsilon(1e-12));
}

TEST_CASE("isa selection") {
  IsaGuard guard;
  CHECK(simd::isa_name(simd::Isa::Scalar) == "scalar");
  simd::set_active_isa(simd::Isa::Scalar);
  CHECK(simd::active_isa() == simd::Isa::Scalar);
  CHECK(&simd::kernels() == &simd::scalar_kernels());
}
