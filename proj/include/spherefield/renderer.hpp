#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spherefield/geometry.hpp"
#include "spherefield/image.hpp"
#include "spherefield/volume_render.hpp"

namespace spherefield {

struct SourceView {
  EquirectImage image;  // linear RGB
  CameraPose pose;
  EquirectImage depth;  // C=1 spherical depth (oracle or estimated)
  // Lower bound on the logistic scale; the per-pixel scale is
  // max(0.02 * depth, visibility_bandwidth). Defaults to half a 64-bin
  // sweep step over [0.1, 10].
  double visibility_bandwidth = 0.5 * (10.0 - 0.1) / 64.0;

  void validate() const;
};

struct RenderConfig {
  int n_coarse = 64;
  int n_fine = 64;
  double near = 0.1;
  double far = 10.0;
  // Density gain on the aggregated hazard; 1 reproduces a single view's
  // termination distribution exactly.
  double kappa = 1.0;
  int n_logistic = 2;
  bool jitter = true;
  std::uint64_t seed = 0;
  int threads = 0;

  void validate() const;
};

// What one source contributes at one ray sample.
struct ViewSample {
  Vec3 color = Vec3::Zero();
  double visibility = 1.0;  // v_j at the start of the sample interval
  double hazard = 0.0;      // mean occlusion hazard over the interval, 1/m
};

struct AggregatedSample {
  Vec3 color = Vec3::Zero();
  double sigma = 0.0;
};

inline constexpr double kVisibilityFloor = 1e-6;

// Visibility-weighted blend: weights (v_j + 1e-6) / sum; color is the
// weighted mean of source colors and sigma = kappa * weighted mean hazard.
// Throws NoSources on an empty span.
AggregatedSample aggregate_sample(std::span<const ViewSample> views, double kappa = 1.0);

// Lookup of one sample interval [a, b] on a target ray in one source.
ViewSample fetch_view_sample(const SourceView& source, const Vec3& start, const Vec3& end, int n_logistic);

// Coarse stratified pass, importance resampling, fine pass over the union.
RenderResult render_ray(PixelCoord pixel, const CameraPose& target, std::span<const SourceView> sources,
                        const RenderConfig& cfg, int height, int width);

struct RenderedView {
  EquirectImage color;
  EquirectImage depth;
  EquirectImage residual;  // transmittance left past the far cap
};

RenderedView render_panorama(const CameraPose& target, std::span<const SourceView> sources, const RenderConfig& cfg,
                             int height, int width);

}  // namespace spherefield
