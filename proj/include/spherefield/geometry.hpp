#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace spherefield {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

// Continuous equirectangular position. u is the column (wraps modulo W),
// v is the row in [0, H]. Integer values are pixel corners; pixel centers
// sit at +0.5.
struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

// theta is longitude in [-pi/2, 3pi/2), phi is the polar angle measured
// from +y in [0, pi], t is the radial (spherical) depth.
struct SphericalCoord {
  double theta = 0.0;
  double phi = 0.0;
  double t = 1.0;
};

// Camera-to-world rigid transform.
struct CameraPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 center = Vec3::Zero();

  static CameraPose at(const Vec3& center) { return CameraPose{Mat3::Identity(), center}; }

  // Throws InvalidParam unless R^T R = I and det R = +1 within 1e-9.
  void validate() const;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();

  Vec3 at(double t) const { return origin + t * direction; }
};

struct Angles {
  double theta = 0.0;
  double phi = 0.0;
};

Angles pixel_to_spherical(PixelCoord p, int height, int width);

Vec3 spherical_to_cartesian(double theta, double phi);

// Quadrant-correct inverse of spherical_to_cartesian. At the poles theta is
// pinned to -pi/2. Throws ZeroVector for |p| < 1e-12.
SphericalCoord cartesian_to_spherical(const Vec3& p);

// Inverse of pixel_to_spherical; u is reduced to [0, W).
PixelCoord spherical_to_pixel(const SphericalCoord& s, int height, int width);

Ray cast_ray(PixelCoord p, const CameraPose& pose, int height, int width);

struct Projection {
  PixelCoord pixel;
  double depth = 0.0;
};

// World point -> pixel and spherical depth in the given camera. Every point
// except the camera center is projectable (full field of view). Throws
// DegeneratePoint within 1e-9 m of the center.
Projection project_point(const Vec3& world, const CameraPose& pose, int height, int width);

// Wraps theta into [-pi/2, 3pi/2).
double wrap_longitude(double theta);

}  // namespace spherefield
