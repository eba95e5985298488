#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace scafrest {

enum class ColorSpace { Gray, RGB, RGBA };

constexpr int channel_count(ColorSpace space) {
  switch (space) {
    case ColorSpace::Gray: return 1;
    case ColorSpace::RGB: return 3;
    case ColorSpace::RGBA: return 4;
  }
  return 0;
}

/// Dense image with interleaved float samples in [0,1], row-major (y, x, channel).
///
/// Every constructor and mutator clamps samples to [0,1], so a Raster held by
/// value always satisfies the range invariant.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, ColorSpace space, float fill = 0.0f);
  /// Takes ownership of `data`; throws InvalidArgument on a length mismatch.
  Raster(int width, int height, ColorSpace space, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channel_count(space_); }
  ColorSpace space() const { return space_; }
  std::size_t pixel_count() const { return std::size_t(width_) * std::size_t(height_); }
  bool empty() const { return data_.empty(); }

  float at(int x, int y, int c) const { return data_[index(x, y, c)]; }
  void set(int x, int y, int c, float v);

  std::span<const float> pixel(int x, int y) const {
    return {data_.data() + index(x, y, 0), std::size_t(channels())};
  }

  std::span<const float> samples() const { return data_; }

  /// Extracts one channel as a Gray raster.
  Raster channel(int c) const;

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (std::size_t(y) * std::size_t(width_) + std::size_t(x)) * std::size_t(channels()) +
           std::size_t(c);
  }

  int width_ = 0;
  int height_ = 0;
  ColorSpace space_ = ColorSpace::Gray;
  std::vector<float> data_;
};

/// H×W boolean map; true marks a scaffold (missing) pixel.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return bits_.size(); }

  bool at(int x, int y) const { return bits_[std::size_t(y) * std::size_t(width_) + std::size_t(x)] != 0; }
  void set(int x, int y, bool v) { bits_[std::size_t(y) * std::size_t(width_) + std::size_t(x)] = v ? 1 : 0; }

  /// Row-major bits, one byte per pixel holding 0 or 1.
  std::span<const std::uint8_t> bits() const { return bits_; }

  std::size_t count() const;
  /// Fraction of true pixels; 0 for an empty mask.
  double coverage() const;

  BinaryMask complement() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Luminance with BT.601 weights; alpha is ignored and Gray passes through.
Raster to_gray(const Raster& img);

/// Drops the alpha channel of an RGBA raster (no premultiplication); other spaces pass through.
Raster to_rgb(const Raster& img);

/// Bilinear resampling with the align-corners convention and edge clamping.
/// A target extent of 1 samples the source centre along that axis.
Raster bilinear_resample(const Raster& img, int new_w, int new_h);

/// Rotates about the image centre on an unchanged canvas; positive angles turn
/// counter-clockwise as displayed (y down). Source neighbours outside the canvas
/// contribute `fill`. Multiples of 90 degrees are exact.
Raster rotate(const Raster& img, double angle_degrees, float fill = 0.0f);

}  // namespace scafrest
