#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spherefield/image.hpp"

namespace spherefield {

// Exact sRGB transfer functions on [0, 1].
double srgb_to_linear(double encoded);
double linear_to_srgb(double linear);
std::uint8_t linear_to_srgb8(double linear);

// Round-trips the image through 8-bit sRGB and returns the encoded values
// scaled to [0, 1]; this is the domain metrics are evaluated in.
EquirectImage quantize_srgb8(const EquirectImage& linear);

// 8-bit RGB/gray PNG. Loading decodes sRGB to linear [0, 1]; saving encodes.
EquirectImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const EquirectImage& linear);

// Portable float map, little-endian (scale -1.0), rows stored bottom-up.
// C must be 1 or 3. Write/read is bit exact.
EquirectImage read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const EquirectImage& img);
std::vector<std::uint8_t> encode_pfm(const EquirectImage& img);

// Writes to a temporary sibling and renames over the destination.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

// FNV-1a 64-bit of a byte buffer, hex encoded. Used for manifests.
std::string fnv1a_hex(std::span<const std::uint8_t> bytes);

}  // namespace spherefield
