#include "spherefield/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "spherefield/error.hpp"
#include "spherefield/features.hpp"
#include "spherefield/geometry.hpp"
#include "spherefield/image_io.hpp"
#include "spherefield/simd/kernels.hpp"

namespace spherefield {

namespace {

void require_same_shape(const EquirectImage& a, const EquirectImage& b) {
  if (!a.same_shape(b) || a.empty()) throw Error(ErrorCode::ShapeMismatch, "metric inputs differ in shape");
}

double psnr_from_mse(double m) {
  if (!(m > 0.0)) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

double row_squared_error(const EquirectImage& a, const EquirectImage& b, int row) {
  const std::size_t n = static_cast<std::size_t>(a.width()) * a.channels();
  return simd::kernels().squared_error_sum(a.pixel(row, 0).data(), b.pixel(row, 0).data(), n);
}

}  // namespace

double latitude_weight(int row, int height) { return std::cos((row + 0.5 - 0.5 * height) * kPi / height); }

double mse(const EquirectImage& a, const EquirectImage& b) {
  require_same_shape(a, b);
  double sum = 0.0;
  for (int r = 0; r < a.height(); ++r) sum += row_squared_error(a, b, r);
  return sum / static_cast<double>(a.size());
}

double psnr(const EquirectImage& a, const EquirectImage& b) { return psnr_from_mse(mse(a, b)); }

double ws_psnr(const EquirectImage& a, const EquirectImage& b) {
  require_same_shape(a, b);
  double weighted = 0.0;
  double weight_sum = 0.0;
  const double per_row = static_cast<double>(a.width()) * a.channels();
  for (int r = 0; r < a.height(); ++r) {
    const double w = latitude_weight(r, a.height());
    weighted += w * row_squared_error(a, b, r);
    weight_sum += w * per_row;
  }
  return psnr_from_mse(weighted / weight_sum);
}

namespace {

// Separable Gaussian blur (wrap horizontally, clamp vertically), double
// precision.
std::vector<double> gaussian_blur(const std::vector<double>& src, int h, int w) {
  constexpr int radius = 5;
  constexpr double sigma = 1.5;
  double kernel[2 * radius + 1];
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) total += kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& k : kernel) k /= total;

  std::vector<double> tmp(src.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * src[r * w + ((c + i) % w + w) % w];
      tmp[r * w + c] = acc;
    }
  }
  std::vector<double> out(src.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp[std::clamp(r + i, 0, h - 1) * w + c];
      out[r * w + c] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const EquirectImage& a, const EquirectImage& b) {
  require_same_shape(a, b);
  const EquirectImage ga = to_gray(a);
  const EquirectImage gb = to_gray(b);
  const int h = ga.height();
  const int w = ga.width();
  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = ga.data()[i];
    y[i] = gb.data()[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = gaussian_blur(x, h, w);
  const auto my = gaussian_blur(y, h, w);
  const auto sxx = gaussian_blur(xx, h, w);
  const auto syy = gaussian_blur(yy, h, w);
  const auto sxy = gaussian_blur(xy, h, w);
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(n);
}

DepthReport depth_metrics(const EquirectImage& pred, const EquirectImage& gt, const EquirectImage* mask) {
  require_same_shape(pred, gt);
  if (gt.channels() != 1) throw Error(ErrorCode::ShapeMismatch, "depth metrics need single-channel maps");
  if (mask && (mask->height() != gt.height() || mask->width() != gt.width())) {
    throw Error(ErrorCode::ShapeMismatch, "depth mask differs in shape");
  }
  DepthReport rep;
  double abs_sum = 0.0, sq_sum = 0.0, ws_abs = 0.0, ws_sq = 0.0, ws_total = 0.0;
  for (int r = 0; r < gt.height(); ++r) {
    const double w = latitude_weight(r, gt.height());
    for (int c = 0; c < gt.width(); ++c) {
      const double g = gt.at(r, c);
      if (!(g >= kValidDepthMin && g <= kValidDepthMax)) continue;
      if (mask && mask->at(r, c) == 0.0f) continue;
      const double e = static_cast<double>(pred.at(r, c)) - g;
      ++rep.valid_pixels;
      abs_sum += std::abs(e);
      sq_sum += e * e;
      ws_abs += w * std::abs(e);
      ws_sq += w * e * e;
      ws_total += w;
    }
  }
  rep.valid_fraction = static_cast<double>(rep.valid_pixels) / (static_cast<double>(gt.height()) * gt.width());
  if (rep.valid_pixels > 0) {
    rep.l1 = abs_sum / rep.valid_pixels;
    rep.l2 = sq_sum / rep.valid_pixels;
    rep.rmse = std::sqrt(rep.l2);
  }
  if (ws_total > 0.0) {
    rep.ws_l1 = ws_abs / ws_total;
    rep.ws_l2 = ws_sq / ws_total;
    rep.ws_rmse = std::sqrt(rep.ws_l2);
  }
  return rep;
}

EquirectImage pole_mask(int height, int width, double fraction) {
  EquirectImage mask(height, width, 1, 1.0f);
  const int band = static_cast<int>(std::ceil(fraction * height - 1e-9));
  for (int r = 0; r < height; ++r) {
    if (r < band || r >= height - band) {
      for (int c = 0; c < width; ++c) mask.at(r, c) = 0.0f;
    }
  }
  return mask;
}

MetricReport image_report(const EquirectImage& pred, const EquirectImage& gt) {
  require_same_shape(pred, gt);
  const EquirectImage qa = quantize_srgb8(pred);
  const EquirectImage qb = quantize_srgb8(gt);
  MetricReport rep;
  rep.psnr = psnr(qa, qb);
  rep.ws_psnr = ws_psnr(qa, qb);
  rep.ssim = ssim(qa, qb);
  rep.notes.push_back("images compared after 8-bit sRGB quantization");
  return rep;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["lpips"] = "not computed (learned metric)";
  if (psnr) j["psnr"] = *psnr;
  if (ws_psnr) j["ws_psnr"] = *ws_psnr;
  if (ssim) j["ssim"] = *ssim;
  if (depth) {
    j["depth"] = {{"l1", depth->l1},       {"l2", depth->l2},       {"rmse", depth->rmse},
                  {"ws_l1", depth->ws_l1}, {"ws_l2", depth->ws_l2}, {"ws_rmse", depth->ws_rmse},
                  {"valid_fraction", depth->valid_fraction}, {"valid_pixels", depth->valid_pixels}};
    j["pole_mask"] = pole_mask;
  }
  if (!notes.empty()) j["notes"] = notes;
  return j;
}

std::string MetricReport::to_table() const {
  std::ostringstream out;
  out << "# LPIPS not computed (learned metric)\n";
  auto line = [&](const char* name, double value, const char* unit) {
    out << std::left << std::setw(16) << name << std::right << std::setw(14) << std::fixed << std::setprecision(6)
        << value << ' ' << unit << '\n';
  };
  if (psnr) line("psnr", *psnr, "dB");
  if (ws_psnr) line("ws_psnr", *ws_psnr, "dB");
  if (ssim) line("ssim", *ssim, "");
  if (depth) {
    line("depth_l1", depth->l1, "m");
    line("depth_l2", depth->l2, "m^2");
    line("depth_rmse", depth->rmse, "m");
    line("depth_ws_l1", depth->ws_l1, "m");
    line("depth_ws_l2", depth->ws_l2, "m^2");
    line("depth_ws_rmse", depth->ws_rmse, "m");
    line("valid_fraction", depth->valid_fraction, "");
    out << std::left << std::setw(16) << "pole_mask" << std::right << std::setw(14) << (pole_mask ? "on" : "off")
        << '\n';
  }
  for (const std::string& n : notes) out << "# " << n << '\n';
  return out.str();
}

}  // namespace spherefield
