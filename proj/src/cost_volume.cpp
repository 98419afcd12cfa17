#include "spherefield/cost_volume.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"

#include "spherefield/error.hpp"
#include "spherefield/image_io.hpp"
#include "spherefield/parallel.hpp"
#include "spherefield/simd/kernels.hpp"

namespace spherefield {

CandidateGrid uniform_grid(int height, int width, const DepthCandidates& candidates) {
  CandidateGrid g;
  g.height = height;
  g.width = width;
  g.count = static_cast<int>(candidates.size());
  const std::size_t pixels = static_cast<std::size_t>(height) * width;
  g.depth.resize(pixels * g.count);
  g.source.resize(pixels * g.count);
  for (std::size_t p = 0; p < pixels; ++p) {
    std::copy(candidates.t.begin(), candidates.t.end(), g.depth.begin() + p * g.count);
    std::copy(candidates.source.begin(), candidates.source.end(), g.source.begin() + p * g.count);
  }
  return g;
}

CandidateGrid build_candidate_grid(int height, int width, const SweepConfig& cfg, const GaussianPrior* prior) {
  const std::vector<double> uniform = uniform_candidates(cfg.near, cfg.far, cfg.n_uni, cfg.spacing);
  if (prior == nullptr || cfg.n_mono == 0) {
    if (uniform.empty()) throw Error(ErrorCode::InvalidParam, "sweep has no depth candidates");
    return uniform_grid(height, width, merge_candidates(uniform, {}, cfg.far));
  }
  prior->validate();
  const std::vector<double> offsets = quantile_offsets(cfg.n_mono, prior->beta);
  CandidateGrid g;
  g.height = height;
  g.width = width;
  g.count = cfg.n_uni + cfg.n_mono;
  const std::size_t pixels = static_cast<std::size_t>(height) * width;
  g.depth.resize(pixels * g.count);
  g.source.resize(pixels * g.count);
  const double sx = static_cast<double>(prior->mu.width()) / width;
  const double sy = static_cast<double>(prior->mu.height()) / height;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double mu = sample_nearest(prior->mu, (c + 0.5) * sx, (r + 0.5) * sy);
      const std::vector<double> mono = mono_candidates(mu, prior->sigma, offsets, cfg.near, cfg.far);
      const DepthCandidates merged = merge_candidates(uniform, mono, cfg.far);
      std::copy(merged.t.begin(), merged.t.end(), g.depth.begin() + g.offset(r, c));
      std::copy(merged.source.begin(), merged.source.end(), g.source.begin() + g.offset(r, c));
    }
  }
  return g;
}

PixelCoord sphere_sweep_warp(const CameraPose& ref_pose, const CameraPose& src_pose, PixelCoord ref_pixel, double t,
                             int height, int width) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidParam, "sweep depth must be positive");
  const Ray ray = cast_ray(ref_pixel, ref_pose, height, width);
  return project_point(ray.at(t), src_pose, height, width).pixel;
}

CostVolume build_cost_volume(const FeatureMap& ref, const FeatureMap& src, const CameraPose& ref_pose,
                             const CameraPose& src_pose, const CandidateGrid& candidates, int threads) {
  if (ref.descriptor != src.descriptor || ref.length() != src.length()) {
    throw Error(ErrorCode::DescriptorMismatch, "reference and source features use different descriptors");
  }
  if (ref.height() != src.height() || ref.width() != src.width() || candidates.height != ref.height() ||
      candidates.width != ref.width()) {
    throw Error(ErrorCode::ShapeMismatch, "feature maps and candidate grid must share a resolution");
  }
  const int h = ref.height();
  const int w = ref.width();
  const std::size_t f = static_cast<std::size_t>(ref.length());
  const int d = candidates.count;

  CostVolume vol;
  vol.candidates = candidates;
  vol.cost.assign(static_cast<std::size_t>(h) * w * d, 0.0f);
  const simd::Kernels& k = simd::kernels();
  const Mat3 src_rot_t = src_pose.rotation.transpose();
  const float* src_data = src.data.data().data();

  parallel_for(static_cast<std::size_t>(h) * w, threads, [&](std::size_t pixel) {
    const int row = static_cast<int>(pixel / w);
    const int col = static_cast<int>(pixel % w);
    const Ray ray = cast_ray({col + 0.5, row + 0.5}, ref_pose, h, w);
    const float* ref_feat = ref.data.pixel(row, col).data();
    const auto depths = candidates.depths_at(row, col);
    float* out = vol.cost.data() + candidates.offset(row, col);
    for (int i = 0; i < d; ++i) {
      const Vec3 local = src_rot_t * (ray.at(depths[i]) - src_pose.center);
      if (local.norm() < 1e-9) {
        out[i] = std::numeric_limits<float>::max();
        continue;
      }
      const PixelCoord p = spherical_to_pixel(cartesian_to_spherical(local), h, w);
      double x = p.u - 0.5;
      if (x < 0.0) x += w;
      const double y = std::clamp(p.v, 0.5, h - 0.5) - 0.5;
      const int c0 = std::min(static_cast<int>(x), w - 1);
      const int r0 = std::min(static_cast<int>(y), h - 1);
      const int c1 = (c0 + 1) % w;
      const int r1 = std::min(r0 + 1, h - 1);
      const float fx = static_cast<float>(x - c0);
      const float fy = static_cast<float>(y - r0);
      auto at = [&](int r, int c) { return src_data + (static_cast<std::size_t>(r) * w + c) * f; };
      out[i] = k.bilinear_l1(ref_feat, at(r0, c0), at(r0, c1), at(r1, c0), at(r1, c1), (1 - fx) * (1 - fy),
                             fx * (1 - fy), (1 - fx) * fy, fx * fy, f);
    }
  });
  return vol;
}

CostVolume build_warped_cost_volume(const EquirectImage& ref_img, const EquirectImage& src_img, Descriptor descriptor,
                                    const CameraPose& ref_pose, const CameraPose& src_pose,
                                    const CandidateGrid& candidates, int threads) {
  if (descriptor == Descriptor::Rgb) {
    return build_cost_volume(extract_features(ref_img, descriptor), extract_features(src_img, descriptor), ref_pose,
                             src_pose, candidates, threads);
  }
  if (!ref_img.same_shape(src_img) || candidates.height != ref_img.height() || candidates.width != ref_img.width()) {
    throw Error(ErrorCode::ShapeMismatch, "images and candidate grid must share a resolution");
  }
  const int h = ref_img.height();
  const int w = ref_img.width();
  const int d = candidates.count;
  const int f = descriptor_length(descriptor);
  const FeatureMap ref = extract_features(ref_img, descriptor);
  const EquirectImage gray = to_gray(src_img);

  CostVolume vol;
  vol.candidates = candidates;
  vol.cost.assign(static_cast<std::size_t>(h) * w * d, 0.0f);
  const Mat3 src_rot_t = src_pose.rotation.transpose();
  const Vec3 base = src_rot_t * (ref_pose.center - src_pose.center);

  parallel_for(static_cast<std::size_t>(h) * w, threads, [&](std::size_t pixel) {
    const int row = static_cast<int>(pixel / w);
    const int col = static_cast<int>(pixel % w);
    // Neighborhood rays in the source frame, matching the taps of
    // extract_features (rows clamp, columns wrap).
    std::array<Vec3, kPatchTaps> dirs;
    int k = 0;
    for (int dr = -kPatchRadius; dr <= kPatchRadius; ++dr) {
      const int r = std::clamp(row + dr, 0, h - 1);
      for (int dc = -kPatchRadius; dc <= kPatchRadius; ++dc) {
        const int c = ((col + dc) % w + w) % w;
        dirs[k++] = src_rot_t * cast_ray({c + 0.5, r + 0.5}, ref_pose, h, w).direction;
      }
    }
    const float* ref_feat = ref.data.pixel(row, col).data();
    const auto depths = candidates.depths_at(row, col);
    float* out = vol.cost.data() + candidates.offset(row, col);
    std::array<double, kPatchTaps> patch;
    std::array<float, kPatchTaps> feat;
    for (int i = 0; i < d; ++i) {
      bool degenerate = false;
      for (int j = 0; j < kPatchTaps; ++j) {
        const Vec3 local = base + depths[i] * dirs[j];
        if (local.norm() < 1e-9) {
          degenerate = true;
          break;
        }
        const PixelCoord p = spherical_to_pixel(cartesian_to_spherical(local), h, w);
        sample_bilinear_wrapped(gray, p.u, p.v, std::span<double>(&patch[j], 1));
      }
      if (degenerate) {
        out[i] = std::numeric_limits<float>::max();
        continue;
      }
      describe_patch(descriptor, patch, feat.data());
      double sum = 0.0;
      for (int j = 0; j < f; ++j) sum += std::abs(static_cast<double>(ref_feat[j]) - feat[j]);
      out[i] = static_cast<float>(sum / f);
    }
  });
  return vol;
}

CostVolume fuse_cost_volumes(std::span<const CostVolume> volumes) {
  if (volumes.empty()) throw Error(ErrorCode::ShapeMismatch, "no cost volumes to fuse");
  for (const CostVolume& v : volumes) {
    if (!v.candidates.same_candidates(volumes.front().candidates) || v.cost.size() != volumes.front().cost.size()) {
      throw Error(ErrorCode::ShapeMismatch, "cost volumes differ in shape or candidates");
    }
  }
  if (volumes.size() == 1) return volumes.front();
  const simd::Kernels& k = simd::kernels();
  const std::size_t n = volumes.front().cost.size();
  std::vector<double> acc(n, 0.0);
  for (const CostVolume& v : volumes) k.accumulate(acc.data(), v.cost.data(), n);
  CostVolume out;
  out.candidates = volumes.front().candidates;
  out.cost.resize(n);
  k.store_scaled(out.cost.data(), acc.data(), 1.0 / static_cast<double>(volumes.size()), n);
  return out;
}

CostVolume aggregate_cost(const CostVolume& vol, int radius, int threads) {
  if (radius < 0) throw Error(ErrorCode::InvalidParam, "aggregation radius must be non-negative");
  if (radius == 0) return vol;
  const int h = vol.height();
  const int w = vol.width();
  const std::size_t d = static_cast<std::size_t>(vol.depth_count());
  const double scale = 1.0 / (2 * radius + 1);
  const simd::Kernels& k = simd::kernels();

  std::vector<float> horizontal(vol.cost.size());
  parallel_for(static_cast<std::size_t>(h) * w, threads, [&](std::size_t pixel) {
    const int row = static_cast<int>(pixel / w);
    const int col = static_cast<int>(pixel % w);
    std::vector<double> acc(d, 0.0);
    for (int dc = -radius; dc <= radius; ++dc) {
      const int c = ((col + dc) % w + w) % w;
      k.accumulate(acc.data(), vol.cost.data() + (static_cast<std::size_t>(row) * w + c) * d, d);
    }
    k.store_scaled(horizontal.data() + pixel * d, acc.data(), scale, d);
  });

  CostVolume out;
  out.candidates = vol.candidates;
  out.cost.resize(vol.cost.size());
  parallel_for(static_cast<std::size_t>(h) * w, threads, [&](std::size_t pixel) {
    const int row = static_cast<int>(pixel / w);
    const int col = static_cast<int>(pixel % w);
    std::vector<double> acc(d, 0.0);
    for (int dr = -radius; dr <= radius; ++dr) {
      const int r = std::clamp(row + dr, 0, h - 1);
      k.accumulate(acc.data(), horizontal.data() + (static_cast<std::size_t>(r) * w + col) * d, d);
    }
    k.store_scaled(out.cost.data() + pixel * d, acc.data(), scale, d);
  });
  return out;
}

EquirectImage decode_depth(const CostVolume& vol, const DecodeOptions& options, int threads) {
  if (options.mode == DecodeMode::Soft && !(options.tau > 0.0)) {
    throw Error(ErrorCode::InvalidParam, "soft decode needs tau > 0");
  }
  const int h = vol.height();
  const int w = vol.width();
  const int d = vol.depth_count();
  EquirectImage depth(h, w, 1);
  std::optional<double> fallback;
  if (options.mono_fallback_ratio) fallback = *options.mono_fallback_ratio * chance_cost(vol);
  parallel_for(static_cast<std::size_t>(h) * w, threads, [&](std::size_t pixel) {
    const int row = static_cast<int>(pixel / w);
    const int col = static_cast<int>(pixel % w);
    const auto costs = vol.costs_at(row, col);
    const auto depths = vol.candidates.depths_at(row, col);
    const auto sources = vol.candidates.sources_at(row, col);

    int best = 0;
    for (int i = 1; i < d; ++i) {
      if (costs[i] < costs[best]) best = i;
    }
    bool mono_only = false;
    if (fallback && costs[best] > *fallback) {
      mono_only = std::find(sources.begin(), sources.end(), CandidateSource::Mono) != sources.end();
    }
    auto usable = [&](int i) { return !mono_only || sources[i] == CandidateSource::Mono; };
    if (mono_only) {
      best = -1;
      for (int i = 0; i < d; ++i) {
        if (usable(i) && (best < 0 || costs[i] < costs[best])) best = i;
      }
    }

    if (options.mode == DecodeMode::WinnerTakeAll) {
      depth.at(row, col) = static_cast<float>(depths[best]);
      return;
    }
    // Softmin over the basin of the winner: walk outwards while costs keep
    // rising, so separate minima elsewhere on the ray are not averaged in.
    int lo = best;
    int hi = best;
    auto prev_usable = [&](int i) {
      do --i;
      while (i >= 0 && !usable(i));
      return i;
    };
    auto next_usable = [&](int i) {
      do ++i;
      while (i < d && !usable(i));
      return i;
    };
    for (int i = prev_usable(lo); i >= 0 && costs[i] >= costs[lo]; i = prev_usable(i)) lo = i;
    for (int i = next_usable(hi); i < d && costs[i] >= costs[hi]; i = next_usable(i)) hi = i;
    const double cmin = costs[best];
    double wsum = 0.0;
    double tsum = 0.0;
    for (int i = lo; i <= hi; ++i) {
      if (!usable(i)) continue;
      const double weight = std::exp(-(costs[i] - cmin) / options.tau);
      wsum += weight;
      tsum += weight * depths[i];
    }
    depth.at(row, col) = static_cast<float>(tsum / wsum);
  });
  return depth;
}

EquirectImage median_filter_depth(const EquirectImage& depth, int radius, int threads) {
  if (radius < 0) throw Error(ErrorCode::InvalidParam, "median radius must be >= 0");
  if (radius == 0) return depth;
  const int h = depth.height();
  const int w = depth.width();
  EquirectImage out = make_image_like(depth);
  const std::size_t taps = static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1);
  parallel_for(static_cast<std::size_t>(h), threads, [&](std::size_t row_index) {
    const int row = static_cast<int>(row_index);
    std::vector<float> window(taps);
    for (int col = 0; col < w; ++col) {
      std::size_t n = 0;
      for (int dr = -radius; dr <= radius; ++dr) {
        const int r = std::clamp(row + dr, 0, h - 1);
        for (int dc = -radius; dc <= radius; ++dc) window[n++] = depth.at(r, ((col + dc) % w + w) % w);
      }
      auto mid = window.begin() + static_cast<std::ptrdiff_t>(taps / 2);
      std::nth_element(window.begin(), mid, window.end());
      out.at(row, col) = *mid;
    }
  });
  return out;
}

double chance_cost(const CostVolume& vol) {
  const std::size_t pixels = static_cast<std::size_t>(vol.height()) * vol.width();
  if (pixels == 0 || vol.depth_count() == 0) throw Error(ErrorCode::InvalidParam, "empty cost volume");
  std::vector<double> means(pixels);
  for (std::size_t p = 0; p < pixels; ++p) {
    const float* c = vol.cost.data() + p * vol.depth_count();
    means[p] = std::accumulate(c, c + vol.depth_count(), 0.0) / vol.depth_count();
  }
  auto mid = means.begin() + static_cast<std::ptrdiff_t>(pixels / 2);
  std::nth_element(means.begin(), mid, means.end());
  return *mid;
}

void dump_cost_volume(const std::filesystem::path& raw_path, const CostVolume& vol) {
  std::vector<std::uint8_t> bytes(vol.cost.size() * 4);
  for (std::size_t i = 0; i < vol.cost.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(vol.cost[i]);
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  write_file_atomic(raw_path, bytes);

  nlohmann::json side;
  side["height"] = vol.height();
  side["width"] = vol.width();
  side["depth_count"] = vol.depth_count();
  side["dtype"] = "float32-le";
  side["layout"] = "row, col, candidate";
  // Uniform sweeps store one shared list; per-pixel lists go to a sibling
  // raw float64 file.
  bool shared = true;
  const auto first = vol.candidates.depths_at(0, 0);
  for (int r = 0; r < vol.height() && shared; ++r) {
    for (int c = 0; c < vol.width() && shared; ++c) {
      const auto here = vol.candidates.depths_at(r, c);
      shared = std::equal(here.begin(), here.end(), first.begin());
    }
  }
  if (shared) {
    side["candidates"] = std::vector<double>(first.begin(), first.end());
  } else {
    std::filesystem::path cand_path = raw_path;
    cand_path += ".candidates.f64";
    std::vector<std::uint8_t> cb(vol.candidates.depth.size() * 8);
    for (std::size_t i = 0; i < vol.candidates.depth.size(); ++i) {
      const auto bits = std::bit_cast<std::uint64_t>(vol.candidates.depth[i]);
      for (int b = 0; b < 8; ++b) cb[8 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
    write_file_atomic(cand_path, cb);
    side["candidates_file"] = cand_path.filename().string();
  }
  std::filesystem::path json_path = raw_path;
  json_path += ".json";
  write_text_atomic(json_path, side.dump(2) + "\n");
}

}  // namespace spherefield
