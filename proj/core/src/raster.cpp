#include "scafrest/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "scafrest/error.hpp"

namespace scafrest {
namespace {

float clamp01(float v) { return std::clamp(v, 0.0f, 1.0f); }

void check_dims(int width, int height) {
  if (width < 0 || height < 0) {
    throw InvalidArgument("raster dimensions must be non-negative");
  }
}

// Linear interpolation written so that equal endpoints reproduce the endpoint exactly.
inline float lerp(float a, float b, float t) { return a + t * (b - a); }

}  // namespace

Raster::Raster(int width, int height, ColorSpace space, float fill)
    : width_(width), height_(height), space_(space) {
  check_dims(width, height);
  data_.assign(pixel_count() * std::size_t(channels()), clamp01(fill));
}

Raster::Raster(int width, int height, ColorSpace space, std::vector<float> data)
    : width_(width), height_(height), space_(space), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != pixel_count() * std::size_t(channels())) {
    throw InvalidArgument("raster data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(width) + "x" +
                          std::to_string(height) + "x" + std::to_string(channels()));
  }
  for (float& v : data_) v = clamp01(v);
}

void Raster::set(int x, int y, int c, float v) { data_[index(x, y, c)] = clamp01(v); }

Raster Raster::channel(int c) const {
  if (c < 0 || c >= channels()) throw InvalidArgument("channel index out of range");
  std::vector<float> out(pixel_count());
  const std::size_t stride = std::size_t(channels());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = data_[i * stride + std::size_t(c)];
  return Raster(width_, height_, ColorSpace::Gray, std::move(out));
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  bits_.assign(std::size_t(width) * std::size_t(height), fill ? 1 : 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  check_dims(width, height);
  if (bits_.size() != std::size_t(width) * std::size_t(height)) {
    throw InvalidArgument("mask bit count does not match dimensions");
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryMask::count() const {
  return std::size_t(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

double BinaryMask::coverage() const {
  if (bits_.empty()) return 0.0;
  return double(count()) / double(bits_.size());
}

BinaryMask BinaryMask::complement() const {
  std::vector<std::uint8_t> out(bits_.size());
  std::transform(bits_.begin(), bits_.end(), out.begin(), [](std::uint8_t b) { return b ? 0 : 1; });
  return BinaryMask(width_, height_, std::move(out));
}

Raster to_gray(const Raster& img) {
  if (img.space() == ColorSpace::Gray) return img;
  std::vector<float> out(img.pixel_count());
  const auto src = img.samples();
  const std::size_t stride = std::size_t(img.channels());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float* p = src.data() + i * stride;
    out[i] = float(0.299 * double(p[0]) + 0.587 * double(p[1]) + 0.114 * double(p[2]));
  }
  return Raster(img.width(), img.height(), ColorSpace::Gray, std::move(out));
}

Raster to_rgb(const Raster& img) {
  if (img.space() != ColorSpace::RGBA) return img;
  std::vector<float> out(img.pixel_count() * 3);
  const auto src = img.samples();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    std::copy_n(src.data() + i * 4, 3, out.data() + i * 3);
  }
  return Raster(img.width(), img.height(), ColorSpace::RGB, std::move(out));
}

Raster bilinear_resample(const Raster& img, int new_w, int new_h) {
  if (new_w < 1 || new_h < 1) throw InvalidArgument("resample target dimensions must be >= 1");
  if (img.empty()) throw InvalidArgument("cannot resample an empty raster");
  if (new_w == img.width() && new_h == img.height()) return img;

  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  auto source_coord = [](int dst, int dst_n, int src_n) {
    if (dst_n == 1) return 0.5 * double(src_n - 1);
    return double(dst) * double(src_n - 1) / double(dst_n - 1);
  };

  std::vector<float> out(std::size_t(new_w) * std::size_t(new_h) * std::size_t(ch));
  for (int y = 0; y < new_h; ++y) {
    const double sy = source_coord(y, new_h, h);
    const int y0 = std::clamp(int(std::floor(sy)), 0, h - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const float fy = float(sy - double(y0));
    for (int x = 0; x < new_w; ++x) {
      const double sx = source_coord(x, new_w, w);
      const int x0 = std::clamp(int(std::floor(sx)), 0, w - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const float fx = float(sx - double(x0));
      float* dst = out.data() + (std::size_t(y) * std::size_t(new_w) + std::size_t(x)) * std::size_t(ch);
      for (int c = 0; c < ch; ++c) {
        const float top = lerp(img.at(x0, y0, c), img.at(x1, y0, c), fx);
        const float bottom = lerp(img.at(x0, y1, c), img.at(x1, y1, c), fx);
        dst[c] = lerp(top, bottom, fy);
      }
    }
  }
  return Raster(new_w, new_h, img.space(), std::move(out));
}

Raster rotate(const Raster& img, double angle_degrees, float fill) {
  if (img.empty()) return img;
  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();

  double turn = std::fmod(angle_degrees, 360.0);
  if (turn < 0) turn += 360.0;
  double cos_a = 0.0;
  double sin_a = 0.0;
  // Right angles get exact trigonometry so that no resampling happens.
  if (turn == 0.0) {
    cos_a = 1.0;
  } else if (turn == 90.0) {
    sin_a = 1.0;
  } else if (turn == 180.0) {
    cos_a = -1.0;
  } else if (turn == 270.0) {
    sin_a = -1.0;
  } else {
    const double rad = turn * std::numbers::pi / 180.0;
    cos_a = std::cos(rad);
    sin_a = std::sin(rad);
  }
  if (cos_a == 1.0) return img;

  const double cx = 0.5 * double(w - 1);
  const double cy = 0.5 * double(h - 1);
  const float fill_v = std::clamp(fill, 0.0f, 1.0f);
  auto sample = [&](int x, int y, int c) -> float {
    if (x < 0 || y < 0 || x >= w || y >= h) return fill_v;
    return img.at(x, y, c);
  };

  std::vector<float> out(std::size_t(w) * std::size_t(h) * std::size_t(ch));
  for (int y = 0; y < h; ++y) {
    const double dy = double(y) - cy;
    for (int x = 0; x < w; ++x) {
      const double dx = double(x) - cx;
      // Inverse mapping: destination pixel back into the source frame.
      const double sx = cx + cos_a * dx - sin_a * dy;
      const double sy = cy + sin_a * dx + cos_a * dy;
      const double fx0 = std::floor(sx);
      const double fy0 = std::floor(sy);
      const int x0 = int(fx0);
      const int y0 = int(fy0);
      const float fx = float(sx - fx0);
      const float fy = float(sy - fy0);
      float* dst = out.data() + (std::size_t(y) * std::size_t(w) + std::size_t(x)) * std::size_t(ch);
      if (x0 < -1 || y0 < -1 || x0 >= w || y0 >= h) {
        std::fill_n(dst, ch, fill_v);
        continue;
      }
      for (int c = 0; c < ch; ++c) {
        const float top = lerp(sample(x0, y0, c), sample(x0 + 1, y0, c), fx);
        const float bottom = lerp(sample(x0, y0 + 1, c), sample(x0 + 1, y0 + 1, c), fx);
        dst[c] = lerp(top, bottom, fy);
      }
    }
  }
  return Raster(w, h, img.space(), std::move(out));
}

}  // namespace scafrest
