#pragma once

#include <array>
#include <span>
#include <vector>

namespace spherefield {

// Occlusion CDF along a ray, o(t) = sum_k m_k S((t - mu_k) / sigma_k) with
// S the logistic sigmoid. Built through make(), which validates, normalizes
// the weights and merges components with identical (mu, sigma).
class LogisticMixture {
 public:
  struct Component {
    double mu = 0.0;
    double sigma = 1.0;
    double weight = 1.0;
  };

  static constexpr int kMaxComponents = 8;

  // Throws InvalidParam on empty input, more than kMaxComponents, sigma <= 0,
  // negative weights or a zero weight sum.
  static LogisticMixture make(const std::vector<Component>& components);

  std::span<const Component> components() const { return {components_.data(), static_cast<std::size_t>(count_)}; }
  int count() const { return count_; }

 private:
  std::array<Component, kMaxComponents> components_{};
  int count_ = 0;
};

double logistic(double x);

double occlusion_prob(const LogisticMixture& mix, double t);
double visibility(const LogisticMixture& mix, double t);

// Visibility of a sample at source-view depth t; thin alias kept so call
// sites read like the per-(sample, view) lookup they are.
inline double sample_visibility(const LogisticMixture& mix, double t) { return visibility(mix, t); }

// Probability mass of the occlusion CDF inside [t - half, t + half].
double hit_mass(const LogisticMixture& mix, double t, double half_width);

// Analytic surface model from a depth estimate. One component: a logistic
// at the depth with scale `bandwidth`. Two components, both centered on the
// depth: a sharp surface term (weight 0.8, scale bandwidth) plus a wide
// uncertainty tail (weight 0.2, scale 3 x bandwidth). v(depth) = 0.5 either
// way.
LogisticMixture mixture_from_depth(double depth, double bandwidth, int components = 2);

// max(0.02 * depth, half the candidate bin width).
double default_bandwidth(double depth, double candidate_bin_width);

}  // namespace spherefield
