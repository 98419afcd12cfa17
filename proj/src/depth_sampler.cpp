#include "spherefield/depth_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spherefield/error.hpp"
#include "spherefield/special_math.hpp"

namespace spherefield {

void GaussianPrior::validate() const {
  if (mu.empty() || mu.channels() != 1) throw Error(ErrorCode::InvalidParam, "prior needs a single-channel depth map");
  if (!(sigma > 0.0) || !(beta > 0.0)) throw Error(ErrorCode::InvalidParam, "prior sigma and beta must be positive");
  for (float m : mu.data()) {
    if (!(m > 0.0f) || !std::isfinite(m)) throw Error(ErrorCode::InvalidParam, "prior depths must be positive");
  }
}

double search_mass(double beta) { return std::erf(beta / std::sqrt(2.0)); }

std::vector<QuantileBin> quantile_bins(int n_mono, double beta) {
  if (n_mono < 1) throw Error(ErrorCode::InvalidParam, "N_mono must be at least 1");
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidParam, "beta must be positive");
  const double mass = search_mass(beta);
  const double tail = 0.5 * (1.0 - mass);
  auto edge = [&](int k) { return std_normal_quantile(static_cast<double>(k) / n_mono * mass + tail); };

  std::vector<QuantileBin> bins(n_mono);
  // Lower half evaluated directly, upper half mirrored so the offsets are
  // exactly antisymmetric and an odd middle bin is exactly centered.
  for (int k = 1; 2 * k <= n_mono; ++k) {
    QuantileBin& lo = bins[k - 1];
    lo.lower = edge(k - 1);
    lo.upper = edge(k);
    lo.offset = 0.5 * (lo.lower + lo.upper);
    bins[n_mono - k] = QuantileBin{-lo.upper, -lo.lower, -lo.offset};
  }
  if (n_mono % 2 == 1) {
    QuantileBin& mid = bins[n_mono / 2];
    mid.lower = edge(n_mono / 2);
    mid.upper = -mid.lower;
    mid.offset = 0.0;
  }
  return bins;
}

std::vector<double> quantile_offsets(int n_mono, double beta) {
  std::vector<double> out;
  for (const QuantileBin& b : quantile_bins(n_mono, beta)) out.push_back(b.offset);
  return out;
}

std::vector<double> mono_candidates(double mu, double sigma, std::span<const double> offsets, double near,
                                    double far) {
  std::vector<double> out(offsets.size());
  for (std::size_t k = 0; k < offsets.size(); ++k) out[k] = std::clamp(mu + offsets[k] * sigma, near, far);
  return out;
}

std::vector<double> mono_candidates(const GaussianPrior& prior, int row, int col, int n_mono, double near,
                                    double far) {
  const std::vector<double> offsets = quantile_offsets(n_mono, prior.beta);
  return mono_candidates(prior.mu.at(row, col), prior.sigma, offsets, near, far);
}

std::vector<double> uniform_candidates(double near, double far, int n_uni, SweepSpacing spacing) {
  if (!(near > 0.0) || !(near < far)) throw Error(ErrorCode::InvalidRange, "uniform sweep needs 0 < near < far");
  if (n_uni < 0) throw Error(ErrorCode::InvalidParam, "N_uni must be non-negative");
  std::vector<double> t(n_uni);
  if (spacing == SweepSpacing::LinearDepth) {
    const double width = (far - near) / n_uni;
    for (int i = 0; i < n_uni; ++i) t[i] = near + (i + 0.5) * width;
  } else {
    const double inv_near = 1.0 / near;
    const double inv_far = 1.0 / far;
    const double width = (inv_near - inv_far) / n_uni;
    for (int i = 0; i < n_uni; ++i) t[i] = 1.0 / (inv_far + (n_uni - i - 0.5) * width);
  }
  return t;
}

DepthCandidates merge_candidates(std::span<const double> uniform, std::span<const double> mono, double far) {
  std::vector<std::pair<double, CandidateSource>> all;
  all.reserve(uniform.size() + mono.size());
  for (double t : uniform) all.emplace_back(t, CandidateSource::Uniform);
  for (double t : mono) all.emplace_back(t, CandidateSource::Mono);
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  for (std::size_t i = 1; i < all.size(); ++i) {
    if (!(all[i].first > all[i - 1].first)) all[i].first = all[i - 1].first + kCandidateNudge;
  }
  if (!all.empty() && all.back().first > far) {
    all.back().first = far;
    for (std::size_t i = all.size() - 1; i-- > 0;) {
      if (!(all[i].first < all[i + 1].first)) all[i].first = all[i + 1].first - kCandidateNudge;
    }
  }

  DepthCandidates out;
  out.t.reserve(all.size());
  out.source.reserve(all.size());
  for (const auto& [t, s] : all) {
    out.t.push_back(t);
    out.source.push_back(s);
  }
  return out;
}

}  // namespace spherefield
