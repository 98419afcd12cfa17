#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spherefield/image.hpp"

namespace spherefield {

enum class CandidateSource : std::uint8_t { Uniform, Mono };

struct GaussianPrior {
  EquirectImage mu;    // C=1 monocular spherical depth, meters
  double sigma = 0.5;  // meters
  double beta = 3.0;

  void validate() const;
};

struct DepthCandidates {
  std::vector<double> t;
  std::vector<CandidateSource> source;

  std::size_t size() const { return t.size(); }
};

// erf(beta / sqrt 2): probability mass of [mu - beta sigma, mu + beta sigma].
double search_mass(double beta);

struct QuantileBin {
  double lower = 0.0;   // z-score of the bin's lower edge
  double upper = 0.0;   // z-score of the bin's upper edge
  double offset = 0.0;  // b_k, midpoint of the two edge quantiles
};

// Equal-probability bins over the central `search_mass(beta)` of the
// standard normal; b_k is the mean of the bin's two edge quantiles.
// Antisymmetric by construction (b_k = -b_{N+1-k}).
std::vector<QuantileBin> quantile_bins(int n_mono, double beta);
std::vector<double> quantile_offsets(int n_mono, double beta);

// mu + b_k sigma at one prior pixel, clamped to [near, far].
std::vector<double> mono_candidates(const GaussianPrior& prior, int row, int col, int n_mono, double near,
                                    double far);
std::vector<double> mono_candidates(double mu, double sigma, std::span<const double> offsets, double near,
                                    double far);

enum class SweepSpacing { LinearDepth, InverseDepth };

// Bin midpoints of n equal-width bins of [near, far], in depth or inverse
// depth. Ascending. Throws InvalidRange unless 0 < near < far.
std::vector<double> uniform_candidates(double near, double far, int n_uni,
                                       SweepSpacing spacing = SweepSpacing::LinearDepth);

inline constexpr double kCandidateNudge = 1e-6;

// Sorted union with provenance; exact duplicates are pushed up by 1e-6 m
// (and back down if that would cross `far`).
DepthCandidates merge_candidates(std::span<const double> uniform, std::span<const double> mono,
                                 double far = 10.0);

}  // namespace spherefield
