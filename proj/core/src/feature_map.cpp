#include "scafrest/feature_map.hpp"

#include <algorithm>
#include <cmath>

#include "scafrest/error.hpp"

namespace scafrest {

FeatureMap::FeatureMap(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || channels < 0) throw InvalidArgument("feature map dimensions must be non-negative");
  data_.assign(std::size_t(height) * std::size_t(width) * std::size_t(channels), fill);
}

FeatureMap::FeatureMap(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height < 0 || width < 0 || channels < 0) throw InvalidArgument("feature map dimensions must be non-negative");
  if (data_.size() != std::size_t(height) * std::size_t(width) * std::size_t(channels)) {
    throw InvalidArgument("feature map data length does not match its shape");
  }
}

FeatureMap to_feature_map(const Raster& img) {
  const auto s = img.samples();
  return FeatureMap(img.height(), img.width(), img.channels(), std::vector<double>(s.begin(), s.end()));
}

Raster to_raster(const FeatureMap& fm, ColorSpace space) {
  if (channel_count(space) != fm.channels()) throw InvalidArgument("to_raster: channel count does not match color space");
  std::vector<float> out(fm.size());
  const auto d = fm.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = float(d[i]);
  return Raster(fm.width(), fm.height(), space, std::move(out));
}

FeatureMap resize_bilinear(const FeatureMap& fm, int h, int w) {
  if (h < 1 || w < 1) throw InvalidArgument("resize_bilinear: target dimensions must be >= 1");
  if (fm.size() == 0) throw InvalidArgument("resize_bilinear: empty feature map");
  if (h == fm.height() && w == fm.width()) return fm;
  FeatureMap out(h, w, fm.channels());
  auto coord = [](int d, int dn, int sn) {
    return dn == 1 ? 0.5 * double(sn - 1) : double(d) * double(sn - 1) / double(dn - 1);
  };
  for (int y = 0; y < h; ++y) {
    const double sy = coord(y, h, fm.height());
    const int y0 = std::clamp(int(std::floor(sy)), 0, fm.height() - 1);
    const int y1 = std::min(y0 + 1, fm.height() - 1);
    const double fy = sy - y0;
    for (int x = 0; x < w; ++x) {
      const double sx = coord(x, w, fm.width());
      const int x0 = std::clamp(int(std::floor(sx)), 0, fm.width() - 1);
      const int x1 = std::min(x0 + 1, fm.width() - 1);
      const double fx = sx - x0;
      for (int c = 0; c < fm.channels(); ++c) {
        const double top = fm.at(y0, x0, c) + fx * (fm.at(y0, x1, c) - fm.at(y0, x0, c));
        const double bottom = fm.at(y1, x0, c) + fx * (fm.at(y1, x1, c) - fm.at(y1, x0, c));
        out.at(y, x, c) = top + fy * (bottom - top);
      }
    }
  }
  return out;
}

}  // namespace scafrest
