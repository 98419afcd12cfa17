#pragma once

#include <span>
#include <string>
#include <string_view>

#include "spherefield/image.hpp"

namespace spherefield {

enum class Descriptor { Rgb, ZnccPatch, Census };

// Throws UnknownDescriptor.
Descriptor parse_descriptor(std::string_view name);
std::string_view descriptor_name(Descriptor d);
int descriptor_length(Descriptor d);

struct FeatureMap {
  EquirectImage data;  // H_f x W_f x F
  Descriptor descriptor = Descriptor::Rgb;

  int height() const { return data.height(); }
  int width() const { return data.width(); }
  int length() const { return data.channels(); }
};

// Rec.601 luma of an RGB image (C=1 images pass through).
EquirectImage to_gray(const EquirectImage& img);

// Box-averages factor x factor blocks. Dimensions must divide evenly.
EquirectImage downsample_box(const EquirectImage& img, int factor);

// rgb: the pixel color (F=3). zncc_patch: zero-mean, unit-norm 5x5 gray
// patch (F=25; flat patches give the zero vector). census: 24 comparisons
// "neighbor < center" over the 5x5 window as 0/1 floats. Patches wrap
// horizontally and clamp vertically. `downsample` > 1 box-filters the image
// first.
FeatureMap extract_features(const EquirectImage& img, Descriptor descriptor, int downsample = 1);

inline constexpr int kPatchRadius = 2;
inline constexpr int kPatchTaps = (2 * kPatchRadius + 1) * (2 * kPatchRadius + 1);

// zncc_patch / census vector of one 5x5 gray patch (row-major, center at
// index 12). `patch` is used as scratch.
void describe_patch(Descriptor descriptor, std::span<double, kPatchTaps> patch, float* out);

}  // namespace spherefield
