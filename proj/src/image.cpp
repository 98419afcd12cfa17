#include "spherefield/image.hpp"

#include <algorithm>
#include <cmath>

#include "spherefield/error.hpp"

namespace spherefield {

EquirectImage::EquirectImage(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw Error(ErrorCode::InvalidParam, "image dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

bool EquirectImage::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float x) { return std::isfinite(x); });
}

EquirectImage make_image_like(const EquirectImage& img) {
  return EquirectImage(img.height(), img.width(), img.channels());
}

namespace {

struct BilinearTaps {
  int row0, row1, col0, col1;
  double fx, fy;
};

BilinearTaps wrapped_taps(int height, int width, double u, double v) {
  double x = u - 0.5;
  x -= width * std::floor(x / width);
  if (x >= width) x -= width;
  const double y = std::clamp(v, 0.5, height - 0.5) - 0.5;

  BilinearTaps t;
  const double x0 = std::floor(x);
  const double y0 = std::floor(y);
  t.fx = x - x0;
  t.fy = y - y0;
  t.col0 = static_cast<int>(x0) % width;
  t.col1 = (t.col0 + 1) % width;
  t.row0 = static_cast<int>(y0);
  t.row1 = std::min(t.row0 + 1, height - 1);
  return t;
}

// Clamp-to-edge bilinear lookup, used inside cube faces.
void sample_bilinear_clamped(const EquirectImage& img, double x, double y, std::span<double> out) {
  const double cx = std::clamp(x, 0.5, img.width() - 0.5) - 0.5;
  const double cy = std::clamp(y, 0.5, img.height() - 0.5) - 0.5;
  const int c0 = static_cast<int>(std::floor(cx));
  const int r0 = static_cast<int>(std::floor(cy));
  const int c1 = std::min(c0 + 1, img.width() - 1);
  const int r1 = std::min(r0 + 1, img.height() - 1);
  const double fx = cx - c0;
  const double fy = cy - r0;
  for (int ch = 0; ch < img.channels(); ++ch) {
    const double top = (1.0 - fx) * img.at(r0, c0, ch) + fx * img.at(r0, c1, ch);
    const double bottom = (1.0 - fx) * img.at(r1, c0, ch) + fx * img.at(r1, c1, ch);
    out[ch] = (1.0 - fy) * top + fy * bottom;
  }
}

struct FaceBasis {
  Vec3 forward, right, down;
};

FaceBasis face_basis(CubeFace face) {
  switch (face) {
    case CubeFace::Front: return {Vec3::UnitX(), Vec3::UnitZ(), -Vec3::UnitY()};
    case CubeFace::Right: return {Vec3::UnitZ(), -Vec3::UnitX(), -Vec3::UnitY()};
    case CubeFace::Back: return {-Vec3::UnitX(), -Vec3::UnitZ(), -Vec3::UnitY()};
    case CubeFace::Left: return {-Vec3::UnitZ(), Vec3::UnitX(), -Vec3::UnitY()};
    case CubeFace::Up: return {Vec3::UnitY(), Vec3::UnitZ(), Vec3::UnitX()};
    case CubeFace::Down: return {-Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitX()};
  }
  return {};
}

CubeFace dominant_face(const Vec3& d) {
  const Vec3 a = d.cwiseAbs();
  if (a.x() >= a.y() && a.x() >= a.z()) return d.x() >= 0.0 ? CubeFace::Front : CubeFace::Back;
  if (a.y() >= a.z()) return d.y() >= 0.0 ? CubeFace::Up : CubeFace::Down;
  return d.z() >= 0.0 ? CubeFace::Right : CubeFace::Left;
}

}  // namespace

void sample_bilinear_wrapped(const EquirectImage& img, double u, double v, std::span<double> out) {
  const BilinearTaps t = wrapped_taps(img.height(), img.width(), u, v);
  const auto p00 = img.pixel(t.row0, t.col0);
  const auto p01 = img.pixel(t.row0, t.col1);
  const auto p10 = img.pixel(t.row1, t.col0);
  const auto p11 = img.pixel(t.row1, t.col1);
  for (int ch = 0; ch < img.channels(); ++ch) {
    const double top = (1.0 - t.fx) * p00[ch] + t.fx * p01[ch];
    const double bottom = (1.0 - t.fx) * p10[ch] + t.fx * p11[ch];
    out[ch] = (1.0 - t.fy) * top + t.fy * bottom;
  }
}

std::vector<double> sample_bilinear_wrapped(const EquirectImage& img, double u, double v) {
  std::vector<double> out(img.channels());
  sample_bilinear_wrapped(img, u, v, out);
  return out;
}

Vec3 sample_rgb(const EquirectImage& img, double u, double v) {
  Vec3 out;
  sample_bilinear_wrapped(img, u, v, std::span<double>(out.data(), 3));
  return out;
}

float sample_nearest(const EquirectImage& img, double u, double v, int ch) {
  const int w = img.width();
  int col = static_cast<int>(std::floor(u - w * std::floor(u / w)));
  col = std::clamp(col, 0, w - 1);
  const int row = std::clamp(static_cast<int>(std::floor(v)), 0, img.height() - 1);
  return img.at(row, col, ch);
}

const char* face_name(CubeFace face) {
  switch (face) {
    case CubeFace::Front: return "front";
    case CubeFace::Right: return "right";
    case CubeFace::Back: return "back";
    case CubeFace::Left: return "left";
    case CubeFace::Up: return "up";
    case CubeFace::Down: return "down";
  }
  return "?";
}

Vec3 cube_face_direction(CubeFace face, double x, double y, int face_size) {
  const FaceBasis b = face_basis(face);
  const double a = 2.0 * x / face_size - 1.0;
  const double c = 2.0 * y / face_size - 1.0;
  return (b.forward + a * b.right + c * b.down).normalized();
}

CubeMap equirect_to_cubemap(const EquirectImage& img, int face_size) {
  if (face_size <= 0) throw Error(ErrorCode::InvalidParam, "cube face size must be positive");
  CubeMap cube;
  cube.face_size = face_size;
  cube.channels = img.channels();
  std::vector<double> value(img.channels());
  for (CubeFace f : kCubeFaces) {
    EquirectImage& out = cube.face(f);
    out = EquirectImage(face_size, face_size, img.channels());
    for (int i = 0; i < face_size; ++i) {
      for (int j = 0; j < face_size; ++j) {
        const Vec3 d = cube_face_direction(f, j + 0.5, i + 0.5, face_size);
        const PixelCoord p = spherical_to_pixel(cartesian_to_spherical(d), img.height(), img.width());
        sample_bilinear_wrapped(img, p.u, p.v, value);
        for (int ch = 0; ch < img.channels(); ++ch) out.at(i, j, ch) = static_cast<float>(value[ch]);
      }
    }
  }
  return cube;
}

EquirectImage cubemap_to_equirect(const CubeMap& cube, int height) {
  if (height <= 0) throw Error(ErrorCode::InvalidParam, "panorama height must be positive");
  const int width = 2 * height;
  EquirectImage out(height, width, cube.channels);
  std::vector<double> value(cube.channels);
  const CameraPose identity;
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      const Vec3 d = cast_ray({col + 0.5, row + 0.5}, identity, height, width).direction;
      const CubeFace f = dominant_face(d);
      const FaceBasis b = face_basis(f);
      const double fwd = d.dot(b.forward);
      const double x = (d.dot(b.right) / fwd + 1.0) * 0.5 * cube.face_size;
      const double y = (d.dot(b.down) / fwd + 1.0) * 0.5 * cube.face_size;
      sample_bilinear_clamped(cube.face(f), x, y, value);
      for (int ch = 0; ch < cube.channels; ++ch) out.at(row, col, ch) = static_cast<float>(value[ch]);
    }
  }
  return out;
}

}  // namespace spherefield
