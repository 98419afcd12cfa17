#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "spherefield/error.hpp"
#include "spherefield/metrics.hpp"
#include "spherefield/renderer.hpp"
#include "spherefield/scene.hpp"

using namespace spherefield;

namespace {

SourceView source_from(const Scene& scene, const CameraPose& pose, int h, int w) {
  GroundTruthView gt = render_gt(scene, pose, h, w);
  return SourceView{std::move(gt.color), pose, std::move(gt.depth)};
}

Scene flat_sphere(const Vec3& color) {
  Scene s;
  Texture t;
  t.color_a = color;
  t.color_b = Vec3::Zero();
  s.primitives.push_back({Sphere{Vec3::Zero(), 2.0}, t});
  return s;
}

}  // namespace

TEST_CASE("aggregate_sample") {
  const Vec3 c(0.2, 0.5, 0.7);
  std::vector<ViewSample> v{{c, 1.0, 0.0}, {c, 1.0, 0.0}};
  CHECK((aggregate_sample(v).color - c).norm() < 1e-12);

  v = {{Vec3(1, 0, 0), 1.0, 2.0}, {Vec3(0, 1, 0), 0.0, 5.0}};
  const AggregatedSample a = aggregate_sample(v, 1.0);
  CHECK((a.color - Vec3(1, 0, 0)).norm() < 2e-6);
  CHECK(a.sigma == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(aggregate_sample(v, 3.0).sigma == doctest::Approx(3.0 * a.sigma));

  CHECK_THROWS_AS(aggregate_sample({}), Error);

  std::mt19937 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ViewSample> views(2 + trial % 4);
    for (auto& s : views) s = {Vec3(u(gen), u(gen), u(gen)), u(gen), u(gen)};
    const AggregatedSample agg = aggregate_sample(views);
    for (int ch = 0; ch < 3; ++ch) {
      double lo = 1.0, hi = 0.0;
      for (const auto& s : views) lo = std::min(lo, s.color[ch]), hi = std::max(hi, s.color[ch]);
      CHECK(agg.color[ch] >= lo - 1e-12);
      CHECK(agg.color[ch] <= hi + 1e-12);
    }
    // Weight normalization: a common factor only moves the 1e-6 floor.
    auto scaled = views;
    for (auto& s : scaled) s.visibility *= 0.5;
    CHECK((aggregate_sample(scaled).color - agg.color).norm() < 1e-4);
  }
}

TEST_CASE("single source in a uniform scene") {
  const Scene scene = flat_sphere({0.3, 0.6, 0.9});
  const CameraPose at{Mat3::Identity(), Vec3(0.3, 0.1, -0.2)};
  const std::vector<SourceView> src{source_from(scene, at, 16, 32)};
  RenderConfig cfg;
  const CameraPose target = CameraPose::at({-0.2, 0.0, 0.1});
  for (int r = 0; r < 16; r += 3)
    for (int c = 0; c < 32; c += 5) {
      const RenderResult res = render_ray({c + 0.5, r + 0.5}, target, src, cfg, 16, 32);
      CHECK(res.transmittance_residual < 1e-6);
      CHECK((res.color - Vec3(0.3, 0.6, 0.9)).norm() < 1e-5);
    }
}

TEST_CASE("black sources render black") {
  const Scene scene = flat_sphere(Vec3::Zero());
  const auto views = line_poses(Vec3::Zero(), 1.0, 2);
  const std::vector<SourceView> src{source_from(scene, views[0], 8, 16), source_from(scene, views[1], 8, 16)};
  const RenderedView out = render_panorama(CameraPose{}, src, RenderConfig{}, 8, 16);
  for (float x : out.color.data()) CHECK(x == 0.0f);
}

TEST_CASE("identity view, depth and determinism") {
  const Scene scene = make_sphere_room();
  const int h = 32, w = 64;
  const std::vector<SourceView> one{source_from(scene, scene.poses[0], h, w)};
  RenderConfig cfg;
  cfg.threads = 1;
  const RenderedView out = render_panorama(scene.poses[0], one, cfg, h, w);
  CHECK(psnr(out.color, one[0].image) >= 40.0);
  CHECK(ws_psnr(out.color, one[0].image) >= 40.0);

  std::vector<double> err;
  for (std::size_t i = 0; i < out.depth.size(); ++i) err.push_back(std::abs(out.depth.data()[i] - one[0].depth.data()[i]));
  std::nth_element(err.begin(), err.begin() + err.size() / 2, err.end());
  CHECK(err[err.size() / 2] <= 9.9 / 64);

  cfg.threads = 3;
  const RenderedView again = render_panorama(scene.poses[0], one, cfg, h, w);
  CHECK(std::memcmp(again.color.data().data(), out.color.data().data(), out.color.size() * sizeof(float)) == 0);
  CHECK(std::memcmp(again.depth.data().data(), out.depth.data().data(), out.depth.size() * sizeof(float)) == 0);

  // A single ray matches the same pixel of the panorama.
  const RenderResult r = render_ray({10.5, 12.5}, scene.poses[0], one, cfg, h, w);
  CHECK(static_cast<float>(r.color[1]) == out.color.at(12, 10, 1));
}

TEST_CASE("more than two sources") {
  const Scene scene = make_sphere_room();
  const int h = 16, w = 32;
  std::vector<SourceView> src;
  for (const CameraPose& p : square_poses(Vec3::Zero(), 1.0)) src.push_back(source_from(scene, p, h, w));
  const RenderedView out = render_panorama(CameraPose{}, src, RenderConfig{}, h, w);
  const GroundTruthView gt = render_gt(scene, CameraPose{}, h, w);
  CHECK(out.color.all_finite());
  CHECK(psnr(out.color, gt.color) > 20.0);
}

TEST_CASE("source at the sample position is ignored") {
  const Scene scene = flat_sphere({0.5, 0.5, 0.5});
  const SourceView s = source_from(scene, CameraPose{}, 8, 16);
  const ViewSample v = fetch_view_sample(s, Vec3::Zero(), Vec3(0.1, 0, 0), 2);
  CHECK(v.visibility == 0.0);
  CHECK(v.hazard == 0.0);
}

TEST_CASE("config validation") {
  RenderConfig cfg;
  cfg.kappa = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = RenderConfig{};
  cfg.near = 11.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = RenderConfig{};
  cfg.n_logistic = 3;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
