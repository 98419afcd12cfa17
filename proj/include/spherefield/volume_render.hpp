#pragma once

#include <span>
#include <vector>

#include "spherefield/geometry.hpp"
#include "spherefield/rng.hpp"

namespace spherefield {

inline constexpr double kDefaultFarCap = 10.0;
inline constexpr double kPdfFloor = 1e-5;

struct RaySamples {
  std::vector<double> t;      // strictly increasing, meters
  std::vector<double> sigma;  // >= 0, 1/m
  std::vector<Vec3> color;    // [0, 1]

  std::size_t size() const { return t.size(); }
  // Throws InvalidParam when the invariants do not hold.
  void validate() const;
};

struct RenderResult {
  Vec3 color = Vec3::Zero();
  double depth = 0.0;  // sum(w t) / sum(w), 0 when sum(w) = 0
  std::vector<double> weights;
  double transmittance_residual = 1.0;  // transmittance past the last sample
};

// 1 - exp(-sigma * delta), kept strictly below 1.
double alpha_from_density(double sigma, double delta);

// Interval lengths; the last one runs to far_cap (0 if already past it).
std::vector<double> sample_intervals(std::span<const double> t, double far_cap = kDefaultFarCap);

struct BlendWeights {
  std::vector<double> weights;
  double residual = 1.0;
};

// w_i = alpha_i * prod_{k<i} (1 - alpha_k).
BlendWeights blend_weights_from_alpha(std::span<const double> alpha);
BlendWeights blend_weights(const RaySamples& samples, double far_cap = kDefaultFarCap);

// Composites against black; the unabsorbed part is reported as
// transmittance_residual.
RenderResult composite(const RaySamples& samples, double far_cap = kDefaultFarCap);
RenderResult composite_alpha(std::span<const double> t, std::span<const double> alpha, std::span<const Vec3> color);

// One sample per equal-width bin of [near, far]: jittered uniformly when
// `jitter`, bin midpoints otherwise. Throws InvalidRange unless 0 < near < far.
std::vector<double> stratified_sample(double near, double far, int count, CounterRng& rng, bool jitter = true);

// Inverse-CDF draws from the piecewise-constant density over the sample
// intervals [t_i, t_{i+1}) (last one ends at far_cap) with mass proportional
// to weight_i + kPdfFloor. Returns `count` sorted depths (fine samples only).
std::vector<double> importance_resample(std::span<const double> coarse_t, std::span<const double> coarse_weights,
                                        double far_cap, int count, CounterRng& rng);

// Sorted union of two ascending depth arrays; ties are nudged apart so the
// result stays strictly increasing.
std::vector<double> merge_sorted_depths(std::span<const double> a, std::span<const double> b);

}  // namespace spherefield
