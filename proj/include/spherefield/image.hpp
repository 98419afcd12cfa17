#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "spherefield/geometry.hpp"

namespace spherefield {

// Row-major H x W x C float grid. Used for color panoramas (C=3, linear
// [0,1]), spherical depth maps (C=1, meters) and cube faces.
class EquirectImage {
 public:
  EquirectImage() = default;
  EquirectImage(int height, int width, int channels, float fill = 0.0f);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  float& at(int row, int col, int ch = 0) { return data_[index(row, col, ch)]; }
  float at(int row, int col, int ch = 0) const { return data_[index(row, col, ch)]; }

  std::span<float> pixel(int row, int col) {
    return {data_.data() + index(row, col, 0), static_cast<std::size_t>(channels_)};
  }
  std::span<const float> pixel(int row, int col) const {
    return {data_.data() + index(row, col, 0), static_cast<std::size_t>(channels_)};
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool same_shape(const EquirectImage& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }
  bool all_finite() const;

  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

// Bilinear lookup at continuous (u, v); pixel centers at integer + 0.5.
// Columns wrap modulo W, rows clamp to [0.5, H - 0.5]. `out` must hold C
// values.
void sample_bilinear_wrapped(const EquirectImage& img, double u, double v, std::span<double> out);
std::vector<double> sample_bilinear_wrapped(const EquirectImage& img, double u, double v);
Vec3 sample_rgb(const EquirectImage& img, double u, double v);

// Value of the pixel containing (u, v), with the same wrap/clamp rules.
float sample_nearest(const EquirectImage& img, double u, double v, int ch = 0);

enum class CubeFace { Front = 0, Right, Back, Left, Up, Down };

inline constexpr std::array<CubeFace, 6> kCubeFaces = {CubeFace::Front, CubeFace::Right, CubeFace::Back,
                                                       CubeFace::Left,  CubeFace::Up,    CubeFace::Down};

const char* face_name(CubeFace face);

// Six 90 degree faces in the camera frame: front +x, right +z, back -x,
// left -z, up +y, down -y.
struct CubeMap {
  int face_size = 0;
  int channels = 0;
  std::array<EquirectImage, 6> faces;

  EquirectImage& face(CubeFace f) { return faces[static_cast<int>(f)]; }
  const EquirectImage& face(CubeFace f) const { return faces[static_cast<int>(f)]; }
};

// Unit direction through continuous face position (x, y), each in [0, F].
Vec3 cube_face_direction(CubeFace face, double x, double y, int face_size);

EquirectImage make_image_like(const EquirectImage& img);

CubeMap equirect_to_cubemap(const EquirectImage& img, int face_size);
EquirectImage cubemap_to_equirect(const CubeMap& cube, int height);

}  // namespace spherefield
