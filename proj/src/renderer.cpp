#include "spherefield/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "spherefield/error.hpp"
#include "spherefield/parallel.hpp"
#include "spherefield/visibility.hpp"

namespace spherefield {

namespace {
// Stand-in for "fully occluded from here on": alpha ~ 1 - exp(-50).
constexpr double kSaturatedOpticalDepth = 50.0;
}  // namespace

void SourceView::validate() const {
  if (image.channels() != 3 || depth.channels() != 1 || image.height() != depth.height() ||
      image.width() != depth.width()) {
    throw Error(ErrorCode::ShapeMismatch, "source image and depth must share H and W");
  }
  if (!(visibility_bandwidth > 0.0)) throw Error(ErrorCode::InvalidParam, "visibility bandwidth must be positive");
  pose.validate();
}

void RenderConfig::validate() const {
  if (n_coarse < 1 || n_fine < 0) throw Error(ErrorCode::InvalidParam, "sample counts must be positive");
  if (!(near > 0.0) || !(near < far)) throw Error(ErrorCode::InvalidRange, "render needs 0 < near < far");
  if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidParam, "kappa must be positive");
  if (n_logistic != 1 && n_logistic != 2) throw Error(ErrorCode::InvalidParam, "n_logistic must be 1 or 2");
}

AggregatedSample aggregate_sample(std::span<const ViewSample> views, double kappa) {
  if (views.empty()) throw Error(ErrorCode::NoSources, "aggregation needs at least one source view");
  double total = 0.0;
  for (const ViewSample& v : views) total += std::clamp(v.visibility, 0.0, 1.0) + kVisibilityFloor;
  AggregatedSample out;
  double hazard = 0.0;
  for (const ViewSample& v : views) {
    const double w = (std::clamp(v.visibility, 0.0, 1.0) + kVisibilityFloor) / total;
    out.color += w * v.color;
    hazard += w * v.hazard;
  }
  out.sigma = kappa * hazard;
  return out;
}

ViewSample fetch_view_sample(const SourceView& source, const Vec3& start, const Vec3& end, int n_logistic) {
  const int h = source.image.height();
  const int w = source.image.width();
  ViewSample vs;
  if ((start - source.pose.center).norm() < 1e-9) {
    // Sample sits on the source's center of projection: no usable lookup.
    vs.visibility = 0.0;
    return vs;
  }
  const Projection proj = project_point(start, source.pose, h, w);
  vs.color = sample_rgb(source.image, proj.pixel.u, proj.pixel.v);

  const double surface = sample_nearest(source.depth, proj.pixel.u, proj.pixel.v);
  if (!(surface > 0.0)) {
    // No geometry at this pixel: treat as empty space.
    vs.visibility = 1.0;
    return vs;
  }
  const double bandwidth = std::max(0.02 * surface, source.visibility_bandwidth);
  const LogisticMixture mix = mixture_from_depth(surface, bandwidth, n_logistic);
  const double t_start = proj.depth;
  const double t_end = (end - source.pose.center).norm();
  const double v_start = visibility(mix, t_start);
  const double v_end = visibility(mix, t_end);
  const double length = (end - start).norm();
  vs.visibility = v_start;
  if (length <= 0.0 || v_end >= v_start) return vs;
  const double log_ratio = v_end > 0.0 ? std::log(v_start / v_end) : kSaturatedOpticalDepth;
  vs.hazard = std::min(log_ratio, kSaturatedOpticalDepth) / length;
  return vs;
}

namespace {

struct SampledRay {
  std::vector<double> alpha;
  std::vector<Vec3> color;
};

SampledRay evaluate_samples(const Ray& ray, std::span<const double> t, std::span<const SourceView> sources,
                            const RenderConfig& cfg) {
  SampledRay out;
  out.alpha.resize(t.size());
  out.color.resize(t.size());
  std::vector<ViewSample> views(sources.size());
  const std::vector<double> delta = sample_intervals(t, cfg.far);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Vec3 start = ray.at(t[i]);
    const Vec3 end = ray.at(t[i] + delta[i]);
    for (std::size_t j = 0; j < sources.size(); ++j) views[j] = fetch_view_sample(sources[j], start, end, cfg.n_logistic);
    const AggregatedSample agg = aggregate_sample(views, cfg.kappa);
    out.alpha[i] = alpha_from_density(agg.sigma, delta[i]);
    out.color[i] = agg.color;
  }
  return out;
}

RenderResult render_ray_impl(const Ray& ray, std::span<const SourceView> sources, const RenderConfig& cfg,
                             CounterRng& rng) {
  const std::vector<double> coarse = stratified_sample(cfg.near, cfg.far, cfg.n_coarse, rng, cfg.jitter);
  const SampledRay coarse_eval = evaluate_samples(ray, coarse, sources, cfg);
  RenderResult coarse_result = composite_alpha(coarse, coarse_eval.alpha, coarse_eval.color);
  if (cfg.n_fine == 0) return coarse_result;

  const std::vector<double> fine = importance_resample(coarse, coarse_result.weights, cfg.far, cfg.n_fine, rng);
  const std::vector<double> all = merge_sorted_depths(coarse, fine);
  const SampledRay fine_eval = evaluate_samples(ray, all, sources, cfg);
  return composite_alpha(all, fine_eval.alpha, fine_eval.color);
}

}  // namespace

RenderResult render_ray(PixelCoord pixel, const CameraPose& target, std::span<const SourceView> sources,
                        const RenderConfig& cfg, int height, int width) {
  if (sources.empty()) throw Error(ErrorCode::NoSources, "rendering needs at least one source view");
  cfg.validate();
  const Ray ray = cast_ray(pixel, target, height, width);
  const auto stream = static_cast<std::uint64_t>(std::floor(pixel.v)) * static_cast<std::uint64_t>(width) +
                      static_cast<std::uint64_t>(std::floor(pixel.u));
  CounterRng rng(cfg.seed, stream);
  return render_ray_impl(ray, sources, cfg, rng);
}

RenderedView render_panorama(const CameraPose& target, std::span<const SourceView> sources, const RenderConfig& cfg,
                             int height, int width) {
  if (sources.empty()) throw Error(ErrorCode::NoSources, "rendering needs at least one source view");
  cfg.validate();
  target.validate();
  for (const SourceView& s : sources) s.validate();

  RenderedView out{EquirectImage(height, width, 3), EquirectImage(height, width, 1), EquirectImage(height, width, 1)};
  parallel_for(static_cast<std::size_t>(height) * width, cfg.threads, [&](std::size_t pixel) {
    const int row = static_cast<int>(pixel / width);
    const int col = static_cast<int>(pixel % width);
    const Ray ray = cast_ray({col + 0.5, row + 0.5}, target, height, width);
    CounterRng rng(cfg.seed, pixel);
    const RenderResult r = render_ray_impl(ray, sources, cfg, rng);
    for (int ch = 0; ch < 3; ++ch) out.color.at(row, col, ch) = static_cast<float>(std::clamp(r.color[ch], 0.0, 1.0));
    out.depth.at(row, col) = static_cast<float>(r.depth);
    out.residual.at(row, col) = static_cast<float>(r.transmittance_residual);
  });
  return out;
}

}  // namespace spherefield
