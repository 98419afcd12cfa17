#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spherefield/config.hpp"
#include "spherefield/cost_volume.hpp"
#include "spherefield/features.hpp"
#include "spherefield/renderer.hpp"
#include "spherefield/scene.hpp"

namespace spherefield {

struct PosedImage {
  EquirectImage image;
  CameraPose pose;
};

struct DepthOptions {
  Descriptor descriptor = Descriptor::ZnccPatch;
  SweepConfig sweep;
  int downsample = 1;
  int cost_radius = 0;
  int median_radius = 2;
  // Resample source patches through each sweep sphere (patch descriptors).
  bool warp_patches = true;
  DecodeOptions decode{DecodeMode::Soft, 0.02, 0.3};
  int threads = 0;
};

struct DepthEstimate {
  EquirectImage depth;  // full resolution
  CostVolume fused;     // at feature resolution, after aggregation
};

// Sweeps the reference against every source, fuses by mean, aggregates and
// decodes. The prior (full resolution) is only consulted when
// options.sweep.n_mono > 0.
DepthEstimate estimate_depth(const PosedImage& reference, std::span<const PosedImage> sources,
                             const DepthOptions& options, const GaussianPrior* prior = nullptr);

// Bilinear (wrapping) resize of a single-channel map to height x 2*height.
EquirectImage upsample_depth(const EquirectImage& depth, int height);

// Config translation helpers shared by the CLI and tests.
DepthOptions depth_options_from(const RunConfig& cfg);
RenderConfig render_config_from(const RunConfig& cfg);
std::vector<CameraPose> layout_poses(const RunConfig& cfg, const Scene& scene);
CameraPose render_target(const RunConfig& cfg, std::span<const CameraPose> poses);

// Each command writes its outputs (atomically) plus manifest.json to
// cfg "out" and returns the manifest.
nlohmann::json cmd_synth(const RunConfig& cfg);
nlohmann::json cmd_depth(const RunConfig& cfg);
nlohmann::json cmd_render(const RunConfig& cfg);
nlohmann::json cmd_convert(const RunConfig& cfg);
// Compares a prediction against a reference file (PNG/PFM colors or PFM depth).
nlohmann::json cmd_eval(const RunConfig& cfg, const std::filesystem::path& pred, const std::filesystem::path& ref);

}  // namespace spherefield
