#include <cmath>
#include <random>

#include "doctest.h"
#include "spherefield/error.hpp"
#include "spherefield/geometry.hpp"

using namespace spherefield;

namespace {

CameraPose random_pose(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(gen), n(gen), n(gen), n(gen));
  q.normalize();
  return CameraPose{q.toRotationMatrix(), Vec3(n(gen), n(gen), n(gen))};
}

}  // namespace

TEST_CASE("pixel_to_spherical literal map") {
  Angles a = pixel_to_spherical({128, 64}, 128, 256);
  CHECK(a.theta == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(a.phi == doctest::Approx(kPi / 2).epsilon(1e-15));

  a = pixel_to_spherical({0, 0}, 128, 256);
  CHECK(a.theta == doctest::Approx(-kPi / 2));
  CHECK(a.phi == 0.0);

  a = pixel_to_spherical({256, 128}, 512, 1024);
  CHECK(std::abs(a.theta) < 1e-15);
  CHECK(a.phi == doctest::Approx(kPi / 4));
}

TEST_CASE("spherical_to_cartesian axes") {
  Vec3 p = spherical_to_cartesian(0.0, kPi / 2);
  CHECK((p - Vec3(1, 0, 0)).norm() < 1e-15);
  for (double th : {-1.0, 0.3, 2.5}) CHECK((spherical_to_cartesian(th, 0.0) - Vec3(0, 1, 0)).norm() < 1e-15);
  p = spherical_to_cartesian(kPi / 2, kPi / 2);
  CHECK((p - Vec3(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("cartesian_to_spherical") {
  SphericalCoord s = cartesian_to_spherical({0, 1, 0});
  CHECK(s.t == 1.0);
  CHECK(s.phi == 0.0);
  CHECK(s.theta == doctest::Approx(-kPi / 2));

  s = cartesian_to_spherical({3, 0, 4});
  CHECK(s.t == doctest::Approx(5.0));
  CHECK(s.phi == doctest::Approx(kPi / 2));
  CHECK(s.theta == doctest::Approx(0.92729521800161).epsilon(1e-12));

  // Quadrants the one-argument arctangent would confuse.
  s = cartesian_to_spherical({-3, 0, -4});
  CHECK((spherical_to_cartesian(s.theta, s.phi) * s.t - Vec3(-3, 0, -4)).norm() < 1e-12);
  CHECK(s.theta >= -kPi / 2);
  CHECK(s.theta < 3 * kPi / 2);

  CHECK_THROWS_AS(cartesian_to_spherical({0, 0, 0}), Error);
  try {
    cartesian_to_spherical({1e-13, 0, 0});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVector);
  }
}

TEST_CASE("spherical_to_pixel inverse and periodicity") {
  PixelCoord p = spherical_to_pixel({kPi / 2, kPi / 2, 1.0}, 512, 1024);
  CHECK(p.u == doctest::Approx(512));
  CHECK(p.v == doctest::Approx(256));
  const PixelCoord a = spherical_to_pixel({-kPi / 2, kPi / 4, 1.0}, 512, 1024);
  const PixelCoord b = spherical_to_pixel({-kPi / 2 + 2 * kPi, kPi / 4, 1.0}, 512, 1024);
  CHECK(std::abs(a.u - b.u) < 1e-9);
  CHECK(a.u >= 0.0);
  CHECK(b.u < 1024.0);
}

TEST_CASE("round trips on random samples") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> uu(0.0, 1024.0), vv(0.0, 512.0);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const PixelCoord p{uu(gen), vv(gen)};
    const Angles a = pixel_to_spherical(p, 512, 1024);
    const PixelCoord q = spherical_to_pixel({a.theta, a.phi, 1.0}, 512, 1024);
    worst = std::max({worst, std::abs(p.u - q.u), std::abs(p.v - q.v)});
  }
  CHECK(worst < 1e-9);

  std::normal_distribution<double> n(0.0, 1.0);
  worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    Vec3 d(n(gen), n(gen), n(gen));
    d.normalize();
    if (std::abs(d.y()) > 1.0 - 1e-6) continue;
    const SphericalCoord s = cartesian_to_spherical(d);
    worst = std::max(worst, (spherical_to_cartesian(s.theta, s.phi) - d).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("cast_ray") {
  const PixelCoord eq{128, 64};  // theta = 0, phi = pi/2 on 128 x 512
  Ray r = cast_ray(eq, CameraPose{}, 128, 512);
  CHECK((r.direction - Vec3(1, 0, 0)).norm() < 1e-15);
  const Mat3 flip = Eigen::AngleAxisd(kPi, Vec3::UnitY()).toRotationMatrix();
  r = cast_ray(eq, CameraPose{flip, Vec3(1, 2, 3)}, 128, 512);
  CHECK((r.direction - Vec3(-1, 0, 0)).norm() < 1e-12);
  CHECK((r.origin - Vec3(1, 2, 3)).norm() == 0.0);

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> uu(0.0, 512.0), vv(0.0, 128.0);
  for (int i = 0; i < 1000; ++i) {
    const Ray q = cast_ray({uu(gen), vv(gen)}, random_pose(gen), 128, 512);
    CHECK(std::abs(q.direction.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("project_point") {
  const CameraPose pose{Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix(), Vec3(0.5, -1, 2)};
  Projection pr = project_point(pose.center + pose.rotation * Vec3(1, 0, 0), pose, 128, 256);
  CHECK(pr.pixel.u == doctest::Approx(64));
  CHECK(pr.pixel.v == doctest::Approx(64));
  CHECK(pr.depth == doctest::Approx(1.0));

  // Behind the camera is still on the panorama: antipodal pixel, same range.
  const Ray r = cast_ray({40.5, 30.5}, pose, 128, 256);
  pr = project_point(r.origin - 5.0 * r.direction, pose, 128, 256);
  CHECK(pr.depth == doctest::Approx(5.0));
  CHECK(std::abs(std::fmod(pr.pixel.u - 40.5 + 256.0, 256.0) - 128.0) < 1e-9);
  CHECK(pr.pixel.v == doctest::Approx(128 - 30.5));

  try {
    project_point(pose.center + Vec3(1e-10, 0, 0), pose, 128, 256);
    FAIL("expected DegeneratePoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegeneratePoint);
  }
}

TEST_CASE("cast/project inverse pair on random poses") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> uu(0.0, 256.0), vv(1.0, 127.0), tt(0.1, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const CameraPose pose = random_pose(gen);
    const PixelCoord p{uu(gen), vv(gen)};
    const double t = tt(gen);
    const Ray r = cast_ray(p, pose, 128, 256);
    const Projection pr = project_point(r.at(t), pose, 128, 256);
    double du = std::abs(pr.pixel.u - p.u);
    du = std::min(du, 256.0 - du);
    worst = std::max({worst, du, std::abs(pr.pixel.v - p.v), std::abs(pr.depth - t)});
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("pose validation") {
  CameraPose bad;
  bad.rotation(0, 0) = -1.0;  // reflection, det = -1
  CHECK_THROWS_AS(bad.validate(), Error);
  CameraPose scaled;
  scaled.rotation *= 1.01;
  CHECK_THROWS_AS(scaled.validate(), Error);
  CHECK_NOTHROW(CameraPose{}.validate());
}
