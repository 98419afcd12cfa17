#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "spherefield/error.hpp"
#include "spherefield/image.hpp"
#include "spherefield/image_io.hpp"
#include "spherefield/metrics.hpp"
#include "spherefield/scene.hpp"

using namespace spherefield;

namespace {

EquirectImage random_image(int h, int w, int c, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<float> d(0.0f, 1.0f);
  EquirectImage img(h, w, c);
  for (float& x : img.data()) x = d(gen);
  return img;
}

// RGB = (x, y, z) / 2 + 0.5 of the pixel-center direction.
EquirectImage direction_field(int h) {
  EquirectImage img(h, 2 * h, 3);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < 2 * h; ++c) {
      const Angles a = pixel_to_spherical({c + 0.5, r + 0.5}, h, 2 * h);
      const Vec3 d = spherical_to_cartesian(a.theta, a.phi);
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = static_cast<float>(0.5 * d[ch] + 0.5);
    }
  return img;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("spherefield_test_" + name);
}

}  // namespace

TEST_CASE("bilinear sampling identities") {
  const EquirectImage img = random_image(8, 16, 3, 1);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 16; ++c) {
      const auto v = sample_bilinear_wrapped(img, c + 0.5, r + 0.5);
      for (int ch = 0; ch < 3; ++ch) CHECK(v[ch] == img.at(r, c, ch));
    }

  const EquirectImage flat(8, 16, 1, 0.3f);
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> d(-40.0, 40.0);
  for (int i = 0; i < 200; ++i) CHECK(sample_bilinear_wrapped(flat, d(gen), d(gen))[0] == doctest::Approx(0.3));

  // u = W - 0.25 sits halfway between the centers of column W-1 and column 0.
  const EquirectImage g = random_image(4, 8, 1, 3);
  const double got = sample_bilinear_wrapped(g, 8 - 0.25, 1.5)[0];
  const double want = 0.75 * g.at(1, 7) + 0.25 * g.at(1, 0);
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("bilinear seam continuity and convexity") {
  const EquirectImage img = random_image(16, 32, 3, 4);
  float lo = 1.0f, hi = 0.0f;
  for (float x : img.data()) lo = std::min(lo, x), hi = std::max(hi, x);
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> vv(-2.0, 18.0);
  for (int i = 0; i < 500; ++i) {
    // Dyadic offsets so that W + eps is itself exact.
    const double eps = (gen() % 64) / 64.0, v = vv(gen);
    const auto a = sample_bilinear_wrapped(img, eps, v);
    const auto b = sample_bilinear_wrapped(img, 32 + eps, v);
    for (int ch = 0; ch < 3; ++ch) {
      CHECK(a[ch] == b[ch]);
      CHECK(a[ch] >= lo);
      CHECK(a[ch] <= hi);
    }
  }
}

TEST_CASE("cubemap of constants and of the direction field") {
  const EquirectImage flat(32, 64, 3, 0.42f);
  const CubeMap cm = equirect_to_cubemap(flat, 16);
  for (const EquirectImage& f : cm.faces)
    for (float x : f.data()) CHECK(x == doctest::Approx(0.42f));
  const EquirectImage back = cubemap_to_equirect(cm, 32);
  for (float x : back.data()) CHECK(x == doctest::Approx(0.42f));

  const EquirectImage field = direction_field(128);
  const int f = 64;
  const CubeMap dcm = equirect_to_cubemap(field, f);
  for (CubeFace face : kCubeFaces) {
    const Vec3 axis = cube_face_direction(face, f / 2.0, f / 2.0, f);
    CHECK(std::abs(axis.cwiseAbs().maxCoeff() - 1.0) < 1e-12);
    const auto center = sample_bilinear_wrapped(dcm.face(face), f / 2.0, f / 2.0);
    for (int ch = 0; ch < 3; ++ch) CHECK(std::abs(center[ch] - (0.5 * axis[ch] + 0.5)) <= 1.0 / 255.0);
  }
  const EquirectImage rt = cubemap_to_equirect(dcm, 128);
  double worst = 0.0;
  for (std::size_t i = 0; i < rt.size(); ++i) worst = std::max(worst, double(std::abs(rt.data()[i] - field.data()[i])));
  CHECK(worst <= 2.0 / 255.0);
}

TEST_CASE("cube face layout") {
  CHECK((cube_face_direction(CubeFace::Front, 8, 8, 16) - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK((cube_face_direction(CubeFace::Right, 8, 8, 16) - Vec3(0, 0, 1)).norm() < 1e-12);
  CHECK((cube_face_direction(CubeFace::Back, 8, 8, 16) - Vec3(-1, 0, 0)).norm() < 1e-12);
  CHECK((cube_face_direction(CubeFace::Left, 8, 8, 16) - Vec3(0, 0, -1)).norm() < 1e-12);
  CHECK((cube_face_direction(CubeFace::Up, 8, 8, 16) - Vec3(0, 1, 0)).norm() < 1e-12);
  CHECK((cube_face_direction(CubeFace::Down, 8, 8, 16) - Vec3(0, -1, 0)).norm() < 1e-12);
}

TEST_CASE("cubemap round trip on an oracle panorama") {
  const Scene scene = make_sphere_room();
  const GroundTruthView gt = render_gt(scene, scene.poses.front(), 128, 256);
  const CubeMap cm = equirect_to_cubemap(gt.color, 128);
  double mean_in = 0.0, mean_face = 0.0;
  for (float x : gt.color.data()) mean_in += x;
  mean_in /= static_cast<double>(gt.color.size());
  const EquirectImage rt = cubemap_to_equirect(cm, 128);
  CHECK(psnr(rt, gt.color) >= 35.0);
  // Face pixels are not equal-area, so compare the stitched panorama mean.
  for (float x : rt.data()) mean_face += x;
  mean_face /= static_cast<double>(rt.size());
  CHECK(std::abs(mean_face - mean_in) <= 0.01 * mean_in);
}

TEST_CASE("sRGB transfer") {
  for (int i = 0; i <= 255; ++i) {
    const double enc = i / 255.0;
    CHECK(linear_to_srgb8(srgb_to_linear(enc)) == i);
  }
  CHECK(srgb_to_linear(0.04045) == doctest::Approx(0.04045 / 12.92));
  CHECK(srgb_to_linear(1.0) == doctest::Approx(1.0));
  CHECK(linear_to_srgb(0.5) == doctest::Approx(0.735356983).epsilon(1e-8));
}

TEST_CASE("PFM round trip is bit exact") {
  for (int c : {1, 3}) {
    EquirectImage img = random_image(5, 10, c, 7 + c);
    img.at(0, 0) = 123.456f;
    img.at(4, 9, c - 1) = -1e-30f;
    const auto path = temp_path("rt" + std::to_string(c) + ".pfm");
    write_pfm(path, img);
    const EquirectImage back = read_pfm(path);
    REQUIRE(back.same_shape(img));
    CHECK(std::memcmp(back.data().data(), img.data().data(), img.size() * sizeof(float)) == 0);
    std::filesystem::remove(path);
  }
}

TEST_CASE("PNG round trip through 8-bit sRGB") {
  const EquirectImage img = random_image(6, 12, 3, 9);
  const auto path = temp_path("rt.png");
  write_png(path, img);
  const EquirectImage back = read_png(path);
  REQUIRE(back.same_shape(img));
  const EquirectImage q = quantize_srgb8(img);
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(linear_to_srgb8(back.data()[i]) == linear_to_srgb8(img.data()[i]));
    CHECK(q.data()[i] == doctest::Approx(linear_to_srgb8(img.data()[i]) / 255.0));
  }
  std::filesystem::remove(path);
}

TEST_CASE("IO errors") {
  const auto path = temp_path("garbage.pfm");
  {
    std::ofstream f(path);
    f << "P9\nnonsense";
  }
  try {
    read_pfm(path);
    FAIL("expected Io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_png(temp_path("does_not_exist.png")), Error);
}

TEST_CASE("atomic writes leave no temporaries") {
  const auto dir = temp_path("atomic");
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_text_atomic(dir / "a.txt", "hello");
  write_text_atomic(dir / "a.txt", "world");
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) (void)e, ++files;
  CHECK(files == 1);
  std::ifstream f(dir / "a.txt");
  std::string s;
  f >> s;
  CHECK(s == "world");
  std::filesystem::remove_all(dir);
}
