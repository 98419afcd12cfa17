#include "spherefield/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "spherefield/error.hpp"

namespace spherefield {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DegeneratePoint: return "DegeneratePoint";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::UnknownDescriptor: return "UnknownDescriptor";
    case ErrorCode::DescriptorMismatch: return "DescriptorMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NoSources: return "NoSources";
    case ErrorCode::NoHit: return "NoHit";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Numerical: return "Numerical";
  }
  return "Unknown";
}

void CameraPose::validate() const {
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = rotation.determinant();
  if (!(ortho <= 1e-9) || !(std::abs(det - 1.0) <= 1e-9)) {
    throw Error(ErrorCode::InvalidParam, "camera rotation is not a proper orthonormal matrix");
  }
  if (!center.allFinite()) throw Error(ErrorCode::InvalidParam, "camera center is not finite");
}

double wrap_longitude(double theta) {
  constexpr double lo = -0.5 * kPi;
  constexpr double period = 2.0 * kPi;
  if (theta >= lo && theta < lo + period) return theta;
  double r = theta - period * std::floor((theta - lo) / period);
  if (r >= lo + period) r -= period;
  if (r < lo) r = lo;
  return r;
}

Angles pixel_to_spherical(PixelCoord p, int height, int width) {
  const double v = std::clamp(p.v, 0.0, static_cast<double>(height));
  Angles a;
  a.phi = v / height * kPi;
  a.theta = wrap_longitude(p.u / width * 2.0 * kPi - 0.5 * kPi);
  return a;
}

Vec3 spherical_to_cartesian(double theta, double phi) {
  const double sp = std::sin(phi);
  return {sp * std::cos(theta), std::cos(phi), sp * std::sin(theta)};
}

SphericalCoord cartesian_to_spherical(const Vec3& p) {
  const double t = p.norm();
  if (!(t >= 1e-12)) throw Error(ErrorCode::ZeroVector, "cannot convert a zero vector to spherical coordinates");
  const double rho = std::hypot(p.x(), p.z());
  SphericalCoord s;
  s.t = t;
  // atan2 form of arccos(y/t); stays well conditioned near the poles.
  s.phi = std::atan2(rho, p.y());
  s.theta = rho == 0.0 ? -0.5 * kPi : wrap_longitude(std::atan2(p.z(), p.x()));
  return s;
}

PixelCoord spherical_to_pixel(const SphericalCoord& s, int height, int width) {
  PixelCoord p;
  p.v = s.phi / kPi * height;
  double u = (s.theta + 0.5 * kPi) / (2.0 * kPi) * width;
  u -= width * std::floor(u / width);
  if (u >= width) u -= width;
  p.u = u;
  return p;
}

Ray cast_ray(PixelCoord p, const CameraPose& pose, int height, int width) {
  const Angles a = pixel_to_spherical(p, height, width);
  Ray r;
  r.origin = pose.center;
  r.direction = (pose.rotation * spherical_to_cartesian(a.theta, a.phi)).normalized();
  return r;
}

Projection project_point(const Vec3& world, const CameraPose& pose, int height, int width) {
  const Vec3 local = pose.rotation.transpose() * (world - pose.center);
  if (!(local.norm() >= 1e-9)) {
    throw Error(ErrorCode::DegeneratePoint, "point coincides with the camera center");
  }
  const SphericalCoord s = cartesian_to_spherical(local);
  return Projection{spherical_to_pixel(s, height, width), s.t};
}

}  // namespace spherefield
