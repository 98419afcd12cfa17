#include <filesystem>
#include <functional>
#include <fstream>

#include "doctest.h"
#include "spherefield/config.hpp"
#include "spherefield/error.hpp"
#include "spherefield/pipeline.hpp"

using namespace spherefield;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Numerical;
}

}  // namespace

TEST_CASE("defaults follow the reference configuration") {
  const RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.get_int("n_uni") + cfg.get_int("n_mono") == 64);
  CHECK(cfg.get_int("n_mono") == 5);
  CHECK(cfg.get_int("n_logistic") == 2);
  CHECK(cfg.get_double("sigma") == 0.5);
  CHECK(cfg.get_double("beta") == 3.0);
  CHECK(cfg.get_int("n_coarse") == 64);
  CHECK(cfg.get_int("n_fine") == 64);
  CHECK(cfg.get_string("descriptor") == "zncc_patch");
  CHECK(cfg.get_double("tau") == 0.02);
  for (const auto& key : RunConfig::schema()) CHECK_FALSE(key.help.empty());
}

TEST_CASE("schema validation") {
  CHECK(code_of([] { RunConfig::from_json({{"heigth", 64}}); }) == ErrorCode::Config);
  CHECK(code_of([] { RunConfig::from_json({{"height", "tall"}}); }) == ErrorCode::Config);
  CHECK(code_of([] { RunConfig::from_json({{"height", 64.5}}); }) == ErrorCode::Config);
  CHECK(code_of([] { RunConfig::from_json(nlohmann::json::array()); }) == ErrorCode::Config);
  CHECK(code_of([] { RunConfig::from_json({{"height", 64}}).validate(); }) == ErrorCode::Config);
  CHECK(code_of([] { RunConfig::from_json({{"descriptor", "sift"}}).validate(); }) == ErrorCode::Config);
  CHECK(code_of([] { RunConfig::from_json({{"near", 5.0}, {"far", 1.0}}).validate(); }) == ErrorCode::Config);
  CHECK(code_of([] { RunConfig::from_json({{"height", 64}, {"width", 128}, {"downsample", 3}}).validate(); }) ==
        ErrorCode::Config);

  const RunConfig ok = RunConfig::from_json({{"height", 64}, {"width", 128}, {"mono_fallback", nullptr}, {"baseline", 2}});
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.is_null("mono_fallback"));
  CHECK(ok.get_double("baseline") == 2.0);
}

TEST_CASE("command-line style overrides") {
  RunConfig cfg;
  cfg.set_from_string("tau", "0.5");
  cfg.set_from_string("jitter", "false");
  cfg.set_from_string("mono_fallback", "none");
  cfg.set_from_string("views", "4");
  CHECK(cfg.get_double("tau") == 0.5);
  CHECK_FALSE(cfg.get_bool("jitter"));
  CHECK(cfg.is_null("mono_fallback"));
  CHECK(cfg.get_int("views") == 4);
  CHECK(code_of([&] { cfg.set_from_string("views", "4x"); }) == ErrorCode::Config);
  CHECK(code_of([&] { cfg.set_from_string("jitter", "maybe"); }) == ErrorCode::Config);
  CHECK(code_of([&] { cfg.set_from_string("nope", "1"); }) == ErrorCode::Config);
}

TEST_CASE("config files and hashing") {
  const auto path = std::filesystem::temp_directory_path() / "spherefield_test_cfg.json";
  {
    std::ofstream f(path);
    f << R"({"scene": "textured-sphere", "height": 64, "width": 128, "threads": 3})";
  }
  const RunConfig a = RunConfig::from_file(path);
  CHECK(a.get_string("scene") == "textured-sphere");
  RunConfig b = a;
  b.set("threads", 1);
  b.set("out", "elsewhere");
  CHECK(a.hash() == b.hash());
  b.set("seed", 9);
  CHECK(a.hash() != b.hash());
  CHECK_FALSE(a.reproducible_values().contains("threads"));
  {
    std::ofstream f(path);
    f << "{ not json";
  }
  CHECK(code_of([&] { RunConfig::from_file(path); }) == ErrorCode::Config);
  std::filesystem::remove(path);
  CHECK(code_of([] { RunConfig::from_file("/nonexistent/cfg.json"); }) == ErrorCode::Io);
}

TEST_CASE("translation to pipeline options") {
  RunConfig cfg;
  DepthOptions d = depth_options_from(cfg);
  CHECK(d.sweep.n_uni == 59);
  CHECK(d.sweep.n_mono == 5);
  cfg.set("depth_mode", "uniform");
  d = depth_options_from(cfg);
  CHECK(d.sweep.n_uni == 64);
  CHECK(d.sweep.n_mono == 0);
  cfg.set("depth_mode", "mono-only");
  d = depth_options_from(cfg);
  CHECK(d.sweep.n_uni == 0);
  CHECK(d.sweep.n_mono == 64);

  const Scene scene = make_sphere_room();
  RunConfig line;
  const auto poses = layout_poses(line, scene);
  REQUIRE(poses.size() == 3);
  CHECK((poses[2].center - poses[0].center).norm() == doctest::Approx(1.0));
  CHECK((render_target(line, poses).center - poses[1].center).norm() < 1e-12);
  line.set("target", "above-middle");
  CHECK((render_target(line, poses).center - poses[1].center - Vec3(0, 0.25, 0)).norm() < 1e-12);

  RunConfig square;
  square.set("layout", "square");
  const auto sq = layout_poses(square, scene);
  REQUIRE(sq.size() == 4);
  CHECK((sq[0].center - sq[2].center).norm() == doctest::Approx(1.0));
}
