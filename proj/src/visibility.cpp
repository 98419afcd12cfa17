#include "spherefield/visibility.hpp"

#include <algorithm>
#include <cmath>

#include "spherefield/error.hpp"

namespace spherefield {

LogisticMixture LogisticMixture::make(const std::vector<Component>& components) {
  if (components.empty()) throw Error(ErrorCode::InvalidParam, "logistic mixture needs at least one component");
  if (components.size() > static_cast<std::size_t>(kMaxComponents)) {
    throw Error(ErrorCode::InvalidParam, "too many logistic components");
  }
  double total = 0.0;
  for (const Component& c : components) {
    if (!std::isfinite(c.mu) || !(c.sigma > 0.0) || !std::isfinite(c.sigma) || !(c.weight >= 0.0)) {
      throw Error(ErrorCode::InvalidParam, "logistic component needs finite mu, sigma > 0 and weight >= 0");
    }
    total += c.weight;
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw Error(ErrorCode::InvalidParam, "mixture weights sum to zero");

  LogisticMixture mix;
  const auto begin = mix.components_.begin();
  for (const Component& c : components) {
    auto end = begin + mix.count_;
    auto same = std::find_if(begin, end, [&](const Component& o) { return o.mu == c.mu && o.sigma == c.sigma; });
    if (same != end) {
      same->weight += c.weight;
    } else if (c.weight > 0.0) {
      mix.components_[mix.count_++] = c;
    }
  }
  if (mix.count_ == 1) {
    mix.components_[0].weight = 1.0;
  } else {
    for (int k = 0; k < mix.count_; ++k) mix.components_[k].weight /= total;
  }
  return mix;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double occlusion_prob(const LogisticMixture& mix, double t) {
  double o = 0.0;
  for (const auto& c : mix.components()) o += c.weight * logistic((t - c.mu) / c.sigma);
  return std::min(o, 1.0);
}

double visibility(const LogisticMixture& mix, double t) { return 1.0 - occlusion_prob(mix, t); }

double hit_mass(const LogisticMixture& mix, double t, double half_width) {
  double mass = 0.0;
  for (const auto& c : mix.components()) {
    // S(b) - S(a) written through tanh to avoid cancellation when both
    // arguments sit far in the same tail.
    const double a = (t - half_width - c.mu) / c.sigma;
    const double b = (t + half_width - c.mu) / c.sigma;
    const double diff = 0.5 * (std::tanh(0.5 * b) - std::tanh(0.5 * a));
    mass += c.weight * diff;
  }
  return std::max(mass, 0.0);
}

LogisticMixture mixture_from_depth(double depth, double bandwidth, int components) {
  if (!(depth > 0.0) || !(bandwidth > 0.0)) {
    throw Error(ErrorCode::InvalidParam, "mixture_from_depth needs positive depth and bandwidth");
  }
  if (components == 1) return LogisticMixture::make({{depth, bandwidth, 1.0}});
  if (components == 2) {
    return LogisticMixture::make({{depth, bandwidth, 0.8}, {depth, 3.0 * bandwidth, 0.2}});
  }
  throw Error(ErrorCode::InvalidParam, "mixture_from_depth supports 1 or 2 components");
}

double default_bandwidth(double depth, double candidate_bin_width) {
  return std::max(0.02 * depth, 0.5 * candidate_bin_width);
}

}  // namespace spherefield
