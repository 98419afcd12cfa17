#include "spherefield/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "spherefield/error.hpp"

namespace spherefield {

namespace {
constexpr double kZnccEps = 1e-8;
}  // namespace

Descriptor parse_descriptor(std::string_view name) {
  if (name == "rgb") return Descriptor::Rgb;
  if (name == "zncc_patch") return Descriptor::ZnccPatch;
  if (name == "census") return Descriptor::Census;
  throw Error(ErrorCode::UnknownDescriptor, "unknown descriptor '" + std::string(name) + "'");
}

std::string_view descriptor_name(Descriptor d) {
  switch (d) {
    case Descriptor::Rgb: return "rgb";
    case Descriptor::ZnccPatch: return "zncc_patch";
    case Descriptor::Census: return "census";
  }
  return "?";
}

int descriptor_length(Descriptor d) {
  switch (d) {
    case Descriptor::Rgb: return 3;
    case Descriptor::ZnccPatch: return 25;
    case Descriptor::Census: return 24;
  }
  return 0;
}

EquirectImage to_gray(const EquirectImage& img) {
  if (img.channels() == 1) return img;
  if (img.channels() != 3) throw Error(ErrorCode::InvalidParam, "gray conversion needs 1 or 3 channels");
  EquirectImage gray(img.height(), img.width(), 1);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const auto p = img.pixel(r, c);
      gray.at(r, c) = static_cast<float>(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]);
    }
  }
  return gray;
}

EquirectImage downsample_box(const EquirectImage& img, int factor) {
  if (factor <= 1) return img;
  if (img.height() % factor != 0 || img.width() % factor != 0) {
    throw Error(ErrorCode::InvalidParam, "image size must be divisible by the downsample factor");
  }
  EquirectImage out(img.height() / factor, img.width() / factor, img.channels());
  const double norm = 1.0 / (factor * factor);
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) {
      for (int ch = 0; ch < img.channels(); ++ch) {
        double sum = 0.0;
        for (int dr = 0; dr < factor; ++dr) {
          for (int dc = 0; dc < factor; ++dc) sum += img.at(r * factor + dr, c * factor + dc, ch);
        }
        out.at(r, c, ch) = static_cast<float>(sum * norm);
      }
    }
  }
  return out;
}

void describe_patch(Descriptor descriptor, std::span<double, kPatchTaps> patch, float* out) {
  if (descriptor == Descriptor::ZnccPatch) {
    double mean = 0.0;
    for (double x : patch) mean += x;
    mean /= kPatchTaps;
    double energy = 0.0;
    for (double& x : patch) {
      x -= mean;
      energy += x * x;
    }
    const double norm = energy > kZnccEps ? 1.0 / std::sqrt(energy) : 0.0;
    for (int i = 0; i < kPatchTaps; ++i) out[i] = static_cast<float>(patch[i] * norm);
    return;
  }
  if (descriptor != Descriptor::Census) throw Error(ErrorCode::InvalidParam, "not a patch descriptor");
  const double center = patch[kPatchTaps / 2];
  int k = 0;
  for (int i = 0; i < kPatchTaps; ++i) {
    if (i != kPatchTaps / 2) out[k++] = patch[i] < center ? 1.0f : 0.0f;
  }
}

FeatureMap extract_features(const EquirectImage& input, Descriptor descriptor, int downsample) {
  if (input.empty()) throw Error(ErrorCode::InvalidParam, "cannot extract features from an empty image");
  const EquirectImage img = downsample_box(input, downsample);
  FeatureMap fm;
  fm.descriptor = descriptor;
  if (descriptor == Descriptor::Rgb) {
    if (img.channels() != 3) throw Error(ErrorCode::InvalidParam, "rgb descriptor needs a 3-channel image");
    fm.data = img;
    return fm;
  }

  const EquirectImage gray = to_gray(img);
  const int h = gray.height();
  const int w = gray.width();
  fm.data = EquirectImage(h, w, descriptor_length(descriptor));
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::array<double, kPatchTaps> patch;
      int k = 0;
      for (int dr = -kPatchRadius; dr <= kPatchRadius; ++dr) {
        const int rr = std::clamp(r + dr, 0, h - 1);
        for (int dc = -kPatchRadius; dc <= kPatchRadius; ++dc) patch[k++] = gray.at(rr, ((c + dc) % w + w) % w);
      }
      describe_patch(descriptor, patch, fm.data.pixel(r, c).data());
    }
  }
  return fm;
}

}  // namespace spherefield
