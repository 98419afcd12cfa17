#include "spherefield/volume_render.hpp"

#include <algorithm>
#include <cmath>

#include "spherefield/error.hpp"

namespace spherefield {

namespace {
constexpr double kAlphaMax = 1.0 - 0x1.0p-53;  // largest double below 1
}

void RaySamples::validate() const {
  if (t.empty()) throw Error(ErrorCode::InvalidParam, "ray needs at least one sample");
  if (sigma.size() != t.size() || color.size() != t.size()) {
    throw Error(ErrorCode::InvalidParam, "ray sample arrays differ in length");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || (i > 0 && !(t[i] > t[i - 1]))) {
      throw Error(ErrorCode::InvalidParam, "sample depths must be finite and strictly increasing");
    }
    if (!(sigma[i] >= 0.0)) throw Error(ErrorCode::InvalidParam, "negative or NaN density");
  }
}

double alpha_from_density(double sigma, double delta) {
  const double x = sigma * delta;
  if (!(x > 0.0)) return 0.0;
  return std::min(-std::expm1(-x), kAlphaMax);
}

std::vector<double> sample_intervals(std::span<const double> t, double far_cap) {
  std::vector<double> delta(t.size());
  for (std::size_t i = 0; i + 1 < t.size(); ++i) delta[i] = t[i + 1] - t[i];
  if (!t.empty()) delta.back() = std::max(0.0, far_cap - t.back());
  return delta;
}

BlendWeights blend_weights_from_alpha(std::span<const double> alpha) {
  BlendWeights out;
  out.weights.resize(alpha.size());
  double transmittance = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out.weights[i] = transmittance * alpha[i];
    transmittance *= 1.0 - alpha[i];
  }
  out.residual = transmittance;
  return out;
}

BlendWeights blend_weights(const RaySamples& samples, double far_cap) {
  samples.validate();
  const std::vector<double> delta = sample_intervals(samples.t, far_cap);
  std::vector<double> alpha(samples.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = alpha_from_density(samples.sigma[i], delta[i]);
  return blend_weights_from_alpha(alpha);
}

RenderResult composite_alpha(std::span<const double> t, std::span<const double> alpha, std::span<const Vec3> color) {
  BlendWeights bw = blend_weights_from_alpha(alpha);
  RenderResult r;
  double wsum = 0.0;
  double tsum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    r.color += bw.weights[i] * color[i];
    wsum += bw.weights[i];
    tsum += bw.weights[i] * t[i];
  }
  r.depth = wsum > 0.0 ? tsum / wsum : 0.0;
  r.transmittance_residual = bw.residual;
  r.weights = std::move(bw.weights);
  return r;
}

RenderResult composite(const RaySamples& samples, double far_cap) {
  samples.validate();
  const std::vector<double> delta = sample_intervals(samples.t, far_cap);
  std::vector<double> alpha(samples.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = alpha_from_density(samples.sigma[i], delta[i]);
  return composite_alpha(samples.t, alpha, samples.color);
}

std::vector<double> stratified_sample(double near, double far, int count, CounterRng& rng, bool jitter) {
  if (!(near > 0.0) || !(near < far)) throw Error(ErrorCode::InvalidRange, "stratified sampling needs 0 < near < far");
  if (count < 1) throw Error(ErrorCode::InvalidParam, "sample count must be positive");
  const double width = (far - near) / count;
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) {
    const double offset = jitter ? rng.uniform() : 0.5;
    t[i] = near + (i + offset) * width;
  }
  return t;
}

std::vector<double> importance_resample(std::span<const double> coarse_t, std::span<const double> coarse_weights,
                                        double far_cap, int count, CounterRng& rng) {
  if (coarse_t.empty() || coarse_t.size() != coarse_weights.size()) {
    throw Error(ErrorCode::InvalidParam, "coarse samples and weights must be non-empty and equal length");
  }
  if (count < 1) return {};
  const std::size_t n = coarse_t.size();
  std::vector<double> edges(n + 1);
  std::copy(coarse_t.begin(), coarse_t.end(), edges.begin());
  edges[n] = std::max(far_cap, coarse_t.back());

  std::vector<double> cdf(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::max(coarse_weights[i], 0.0) + kPdfFloor;
    // Zero-width bins (far cap reached) get no mass.
    cdf[i + 1] = cdf[i] + (edges[i + 1] > edges[i] ? w : 0.0);
  }
  const double total = cdf[n];

  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) {
    const double target = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin() + 1, cdf.end(), target);
    std::size_t bin = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()) - 1, n - 1);
    while (bin + 1 < n && cdf[bin + 1] == cdf[bin]) ++bin;
    const double mass = cdf[bin + 1] - cdf[bin];
    const double frac = mass > 0.0 ? std::clamp((target - cdf[bin]) / mass, 0.0, 1.0) : 0.5;
    out[k] = edges[bin] + frac * (edges[bin + 1] - edges[bin]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> merge_sorted_depths(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), out.begin());
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i] > out[i - 1])) out[i] = std::nextafter(out[i - 1], INFINITY);
  }
  return out;
}

}  // namespace spherefield
