#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "spherefield/depth_sampler.hpp"
#include "spherefield/features.hpp"
#include "spherefield/geometry.hpp"

namespace spherefield {

// Per-pixel depth hypotheses for a sweep, D per pixel, stored pixel-major.
// Uniform sweeps repeat the same list everywhere; mono-guided sweeps differ
// per pixel.
struct CandidateGrid {
  int height = 0;
  int width = 0;
  int count = 0;
  std::vector<double> depth;
  std::vector<CandidateSource> source;

  std::span<const double> depths_at(int row, int col) const {
    return {depth.data() + offset(row, col), static_cast<std::size_t>(count)};
  }
  std::span<const CandidateSource> sources_at(int row, int col) const {
    return {source.data() + offset(row, col), static_cast<std::size_t>(count)};
  }
  std::size_t offset(int row, int col) const {
    return (static_cast<std::size_t>(row) * width + col) * count;
  }
  bool same_candidates(const CandidateGrid& other) const {
    return height == other.height && width == other.width && count == other.count && depth == other.depth;
  }
};

CandidateGrid uniform_grid(int height, int width, const DepthCandidates& candidates);

struct SweepConfig {
  int n_uni = 59;
  int n_mono = 5;
  double near = 0.1;
  double far = 10.0;
  SweepSpacing spacing = SweepSpacing::LinearDepth;
};

// Uniform candidates everywhere plus, when a prior is supplied and
// n_mono > 0, mono-guided candidates per pixel. The prior is sampled at the
// grid resolution (nearest pixel).
CandidateGrid build_candidate_grid(int height, int width, const SweepConfig& cfg,
                                   const GaussianPrior* prior = nullptr);

// H x W x D matching costs (lower is better) with the candidates they were
// computed for.
struct CostVolume {
  CandidateGrid candidates;
  std::vector<float> cost;

  int height() const { return candidates.height; }
  int width() const { return candidates.width; }
  int depth_count() const { return candidates.count; }
  std::span<const float> costs_at(int row, int col) const {
    return {cost.data() + candidates.offset(row, col), static_cast<std::size_t>(candidates.count)};
  }
};

// Reference pixel (continuous) at spherical depth t, seen from the source.
PixelCoord sphere_sweep_warp(const CameraPose& ref_pose, const CameraPose& src_pose, PixelCoord ref_pixel, double t,
                             int height, int width);

// cost(u, v, i) = mean |f_ref(u, v) - f_src(warp(u, v, t_i))| with wrap-aware
// bilinear source lookup. Throws DescriptorMismatch / ShapeMismatch.
CostVolume build_cost_volume(const FeatureMap& ref, const FeatureMap& src, const CameraPose& ref_pose,
                             const CameraPose& src_pose, const CandidateGrid& candidates, int threads = 0);

// Patch descriptors described per hypothesis: the reference 5x5
// neighborhood is carried to depth t along its own rays and the source gray
// image is sampled there, so the source patch is resampled through the sweep
// sphere instead of read from the source's own pixel grid. Images are at
// candidate-grid resolution. rgb reduces to build_cost_volume.
CostVolume build_warped_cost_volume(const EquirectImage& ref_img, const EquirectImage& src_img, Descriptor descriptor,
                                    const CameraPose& ref_pose, const CameraPose& src_pose,
                                    const CandidateGrid& candidates, int threads = 0);

// Elementwise mean; volumes must share candidates. Throws ShapeMismatch.
CostVolume fuse_cost_volumes(std::span<const CostVolume> volumes);

// Separable box filter of half-width `radius` on each depth slab, wrapping
// horizontally and clamping vertically. radius 0 returns the input.
CostVolume aggregate_cost(const CostVolume& vol, int radius, int threads = 0);

enum class DecodeMode { WinnerTakeAll, Soft };

struct DecodeOptions {
  DecodeMode mode = DecodeMode::Soft;
  double tau = 0.02;
  // Mono fallback: where the best matching cost exceeds this fraction of
  // the volume's chance level (median over pixels of the mean cost across
  // candidates) the photometric evidence is treated as unreliable and only
  // mono-tagged candidates are decoded. Disabled when unset or when a pixel
  // has no mono candidates.
  std::optional<double> mono_fallback_ratio;
};

EquirectImage decode_depth(const CostVolume& vol, const DecodeOptions& options = {}, int threads = 0);

// (2r+1)^2 median of a decoded depth map, wrapping horizontally and
// clamping vertically. Unlike box aggregation it keeps depth edges in
// place. radius 0 returns the input.
EquirectImage median_filter_depth(const EquirectImage& depth, int radius, int threads = 0);

// Median over pixels of the per-pixel mean cost: the cost of an unrelated
// feature pair for this descriptor and scene.
double chance_cost(const CostVolume& vol);

// Raw little-endian float32 costs (pixel-major, D innermost) plus a JSON
// sidecar with the dimensions and per-pixel candidate layout.
void dump_cost_volume(const std::filesystem::path& raw_path, const CostVolume& vol);

}  // namespace spherefield
