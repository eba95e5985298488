#include "scafrest/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "scafrest/error.hpp"

namespace scafrest {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

void on_png_error(png_structp png, png_const_charp msg) {
  auto* buffer = static_cast<std::string*>(png_get_error_ptr(png));
  if (buffer) *buffer = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> bytes;
};

// Everything touched between setjmp and longjmp lives in the caller's frame or
// on the heap so that unwinding through libpng is well defined.
bool decode(std::FILE* fp, DecodedPng& out, std::string& err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
  if (!png) {
    err = "png_create_read_struct failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    err = "png_create_info_struct failed";
    return false;
  }
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (png_get_bit_depth(png, info) == 16) png_set_swap(png);
  png_read_update_info(png, info);

  out.width = int(png_get_image_width(png, info));
  out.height = int(png_get_image_height(png, info));
  out.channels = int(png_get_channels(png, info));
  out.bit_depth = int(png_get_bit_depth(png, info));
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out.bytes.resize(row_bytes * std::size_t(out.height));
  rows.resize(std::size_t(out.height));
  for (int y = 0; y < out.height; ++y) rows[std::size_t(y)] = out.bytes.data() + row_bytes * std::size_t(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode(std::FILE* fp, int width, int height, int color_type,
            std::vector<png_bytep>& rows, std::string& err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
  if (!png) {
    err = "png_create_write_struct failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    err = "png_create_info_struct failed";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void write_bytes(const std::filesystem::path& path, int width, int height, int channels,
                 std::vector<std::uint8_t>& bytes) {
  int color_type = PNG_COLOR_TYPE_GRAY;
  if (channels == 3) color_type = PNG_COLOR_TYPE_RGB;
  if (channels == 4) color_type = PNG_COLOR_TYPE_RGB_ALPHA;
  const std::size_t row_bytes = std::size_t(width) * std::size_t(channels);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[std::size_t(y)] = bytes.data() + row_bytes * std::size_t(y);

  auto fp = open_file(path, "wb");
  std::string err;
  if (!encode(fp.get(), width, height, color_type, rows, err)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + err);
  }
  if (std::fflush(fp.get()) != 0) throw IoError("cannot flush '" + path.string() + "'");
}

}  // namespace

Raster load_png(const std::filesystem::path& path) {
  auto fp = open_file(path, "rb");
  DecodedPng png;
  std::string err;
  if (!decode(fp.get(), png, err)) {
    throw IoError("cannot decode PNG '" + path.string() + "': " + err);
  }

  ColorSpace space;
  switch (png.channels) {
    case 1: space = ColorSpace::Gray; break;
    case 3: space = ColorSpace::RGB; break;
    case 4: space = ColorSpace::RGBA; break;
    default:
      throw IoError("unsupported channel count " + std::to_string(png.channels) + " in '" +
                    path.string() + "'");
  }

  const std::size_t n = std::size_t(png.width) * std::size_t(png.height) * std::size_t(png.channels);
  std::vector<float> data(n);
  if (png.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = unsigned(png.bytes[2 * i]) | (unsigned(png.bytes[2 * i + 1]) << 8);
      data[i] = float(double(v) / 65535.0);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) data[i] = float(double(png.bytes[i]) / 255.0);
  }
  return Raster(png.width, png.height, space, std::move(data));
}

void save_png(const Raster& img, const std::filesystem::path& path) {
  const auto src = img.samples();
  std::vector<std::uint8_t> bytes(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) bytes[i] = quantize8(src[i]);
  write_bytes(path, img.width(), img.height(), img.channels(), bytes);
}

void save_png(const BinaryMask& mask, const std::filesystem::path& path) {
  const auto bits = mask.bits();
  std::vector<std::uint8_t> bytes(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bytes[i] = bits[i] ? 255 : 0;
  write_bytes(path, mask.width(), mask.height(), 1, bytes);
}

BinaryMask load_mask_png(const std::filesystem::path& path) {
  const Raster r = load_png(path);
  std::vector<std::uint8_t> bits(r.pixel_count());
  const auto s = r.samples();
  const std::size_t stride = std::size_t(r.channels());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = s[i * stride] > 0.0f ? 1 : 0;
  return BinaryMask(r.width(), r.height(), std::move(bits));
}

}  // namespace scafrest
