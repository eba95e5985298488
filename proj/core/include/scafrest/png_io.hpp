#pragma once

#include <cstdint>
#include <filesystem>

#include "scafrest/raster.hpp"

namespace scafrest {

/// Reads an 8- or 16-bit PNG with 1, 3, or 4 channels. Palette images are
/// expanded to RGB(A); gray+alpha is rejected.
Raster load_png(const std::filesystem::path& path);

/// Writes an 8-bit PNG. Samples are quantized with round-half-up on v * 255.
void save_png(const Raster& img, const std::filesystem::path& path);

/// Writes a 1-channel 8-bit PNG: true -> 255, false -> 0.
void save_png(const BinaryMask& mask, const std::filesystem::path& path);

/// Reads a mask PNG; any nonzero gray sample (or nonzero first channel) is true.
BinaryMask load_mask_png(const std::filesystem::path& path);

/// The 8-bit code a sample maps to when written.
inline std::uint8_t quantize8(float v) {
  const float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return static_cast<std::uint8_t>(static_cast<int>(c * 255.0f + 0.5f));
}

}  // namespace scafrest
