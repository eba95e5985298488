#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scafrest/raster.hpp"

namespace scafrest {

/// Dense H x W x C array of doubles, row-major (y, x, channel). Unlike Raster,
/// values are unbounded; used for feature maps and token grids.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int height, int width, int channels, double fill = 0.0);
  FeatureMap(int height, int width, int channels, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }

  double& at(int y, int x, int c) { return data_[index(y, x, c)]; }
  double at(int y, int x, int c) const { return data_[index(y, x, c)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (std::size_t(y) * std::size_t(width_) + std::size_t(x)) * std::size_t(channels_) + std::size_t(c);
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

FeatureMap to_feature_map(const Raster& img);

/// Align-corners bilinear resize without clamping (the FeatureMap analogue of
/// bilinear_resample).
FeatureMap resize_bilinear(const FeatureMap& fm, int height, int width);

/// Converts back to a Raster of the given color space; values are clamped to [0,1].
Raster to_raster(const FeatureMap& fm, ColorSpace space);

}  // namespace scafrest
