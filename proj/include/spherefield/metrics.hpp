#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spherefield/image.hpp"

namespace spherefield {

inline constexpr double kPsnrCap = 99.0;
inline constexpr double kValidDepthMin = 0.1;
inline constexpr double kValidDepthMax = 10.0;

// cos((v + 0.5 - H/2) pi / H) for row v.
double latitude_weight(int row, int height);

double mse(const EquirectImage& a, const EquirectImage& b);
// 10 log10(1 / MSE) over all channels, capped at 99 dB.
double psnr(const EquirectImage& a, const EquirectImage& b);
// PSNR with cosine-latitude row weights (normalized).
double ws_psnr(const EquirectImage& a, const EquirectImage& b);
// Mean local SSIM on Rec.601 gray, 11x11 Gaussian (sigma 1.5), K1 = 0.01,
// K2 = 0.03, dynamic range 1, horizontal wrap and vertical clamp. Raw value
// in [-1, 1].
double ssim(const EquirectImage& a, const EquirectImage& b);

struct DepthReport {
  double l1 = 0.0;
  double l2 = 0.0;
  double rmse = 0.0;
  double ws_l1 = 0.0;
  double ws_l2 = 0.0;
  double ws_rmse = 0.0;
  double valid_fraction = 0.0;
  std::size_t valid_pixels = 0;
};

// Over pixels with gt in [0.1, 10] (and mask != 0 when a mask is given).
// Latitude-weighted variants use the WS-PSNR row weights.
DepthReport depth_metrics(const EquirectImage& pred, const EquirectImage& gt, const EquirectImage* mask = nullptr);

// Mask excluding the top and bottom `fraction` of rows.
EquirectImage pole_mask(int height, int width, double fraction = 0.05);

struct MetricReport {
  std::optional<double> psnr;
  std::optional<double> ws_psnr;
  std::optional<double> ssim;
  std::optional<DepthReport> depth;
  bool pole_mask = false;
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

// Quantizes both images to 8-bit sRGB first, then PSNR / WS-PSNR / SSIM.
MetricReport image_report(const EquirectImage& pred, const EquirectImage& gt);

}  // namespace spherefield
