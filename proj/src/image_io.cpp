#include "spherefield/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include "spherefield/error.hpp"

namespace spherefield {

double srgb_to_linear(double encoded) {
  if (encoded <= 0.04045) return encoded / 12.92;
  return std::pow((encoded + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double linear) {
  const double x = std::clamp(linear, 0.0, 1.0);
  if (x <= 0.0031308) return 12.92 * x;
  return 1.055 * std::pow(x, 1.0 / 2.4) - 0.055;
}

std::uint8_t linear_to_srgb8(double linear) {
  return static_cast<std::uint8_t>(std::lround(linear_to_srgb(linear) * 255.0));
}

EquirectImage quantize_srgb8(const EquirectImage& linear) {
  EquirectImage out = make_image_like(linear);
  auto src = linear.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = linear_to_srgb8(src[i]) / 255.0f;
  return out;
}

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

void append_png_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

[[noreturn]] void png_fail(png_structp, png_const_charp msg) { throw Error(ErrorCode::Io, std::string("png: ") + msg); }

}  // namespace

EquirectImage read_png(const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!file) throw Error(ErrorCode::Io, "cannot open " + path.string());

  PngReadGuard g;
  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, nullptr);
  if (!g.png) throw Error(ErrorCode::Io, "png_create_read_struct failed");
  g.info = png_create_info_struct(g.png);
  png_init_io(g.png, file.get());
  png_read_info(g.png, g.info);

  png_set_strip_16(g.png);
  png_set_strip_alpha(g.png);
  png_set_packing(g.png);
  png_set_palette_to_rgb(g.png);
  png_set_expand_gray_1_2_4_to_8(g.png);
  png_read_update_info(g.png, g.info);

  const int width = static_cast<int>(png_get_image_width(g.png, g.info));
  const int height = static_cast<int>(png_get_image_height(g.png, g.info));
  const int channels = png_get_channels(g.png, g.info);
  std::vector<png_byte> buffer(static_cast<std::size_t>(width) * height * channels);
  std::vector<png_bytep> rows(height);
  for (int r = 0; r < height; ++r) rows[r] = buffer.data() + static_cast<std::size_t>(r) * width * channels;
  png_read_image(g.png, rows.data());

  EquirectImage img(height, width, channels);
  auto dst = img.data();
  for (std::size_t i = 0; i < buffer.size(); ++i) dst[i] = static_cast<float>(srgb_to_linear(buffer[i] / 255.0));
  return img;
}

void write_png(const std::filesystem::path& path, const EquirectImage& linear) {
  if (linear.channels() != 1 && linear.channels() != 3) {
    throw Error(ErrorCode::InvalidParam, "PNG output supports 1 or 3 channels");
  }
  std::vector<std::uint8_t> encoded;
  {
    PngWriteGuard g;
    g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, nullptr);
    if (!g.png) throw Error(ErrorCode::Io, "png_create_write_struct failed");
    g.info = png_create_info_struct(g.png);
    png_set_write_fn(g.png, &encoded, append_png_bytes, nullptr);
    png_set_IHDR(g.png, g.info, linear.width(), linear.height(), 8,
                 linear.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_sRGB(g.png, g.info, PNG_sRGB_INTENT_PERCEPTUAL);
    png_write_info(g.png, g.info);
    const int stride = linear.width() * linear.channels();
    std::vector<png_byte> row(stride);
    auto src = linear.data();
    for (int r = 0; r < linear.height(); ++r) {
      for (int i = 0; i < stride; ++i) row[i] = linear_to_srgb8(src[static_cast<std::size_t>(r) * stride + i]);
      png_write_row(g.png, row.data());
    }
    png_write_end(g.png, nullptr);
  }
  write_file_atomic(path, encoded);
}

std::vector<std::uint8_t> encode_pfm(const EquirectImage& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw Error(ErrorCode::InvalidParam, "PFM supports 1 or 3 channels");
  }
  std::ostringstream header;
  header << (img.channels() == 3 ? "PF" : "Pf") << '\n' << img.width() << ' ' << img.height() << "\n-1.0\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> bytes(h.begin(), h.end());
  const std::size_t row_floats = static_cast<std::size_t>(img.width()) * img.channels();
  bytes.reserve(bytes.size() + img.size() * 4);
  auto src = img.data();
  for (int r = img.height() - 1; r >= 0; --r) {
    for (std::size_t i = 0; i < row_floats; ++i) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(src[r * row_floats + i]);
      for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
  }
  return bytes;
}

void write_pfm(const std::filesystem::path& path, const EquirectImage& img) { write_file_atomic(path, encode_pfm(img)); }

EquirectImage read_pfm(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_all(path);
  // Header is three whitespace-terminated tokens: magic, "W H", scale.
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    return t;
  };
  const std::string magic = token();
  const std::string ws = token();
  const std::string hs = token();
  const std::string scale_s = token();
  ++pos;  // single whitespace byte before raster
  int channels = 0;
  if (magic == "PF") channels = 3;
  else if (magic == "Pf") channels = 1;
  else throw Error(ErrorCode::Io, path.string() + " is not a PFM file");
  int width = 0, height = 0;
  double scale = 0.0;
  try {
    width = std::stoi(ws);
    height = std::stoi(hs);
    scale = std::stod(scale_s);
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, path.string() + ": malformed PFM header");
  }
  if (width <= 0 || height <= 0) throw Error(ErrorCode::Io, path.string() + ": bad PFM dimensions");
  const bool little = scale < 0.0;
  const std::size_t row_floats = static_cast<std::size_t>(width) * channels;
  if (bytes.size() < pos + row_floats * height * 4) throw Error(ErrorCode::Io, path.string() + ": truncated PFM");

  EquirectImage img(height, width, channels);
  auto dst = img.data();
  for (int r = height - 1; r >= 0; --r) {
    for (std::size_t i = 0; i < row_floats; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        const std::uint32_t byte = bytes[pos + b];
        bits |= little ? byte << (8 * b) : byte << (8 * (3 - b));
      }
      pos += 4;
      dst[r * row_floats + i] = std::bit_cast<float>(bits);
    }
  }
  return img;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string fnv1a_hex(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace spherefield
