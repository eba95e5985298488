#include <gtest/gtest.h>

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "scafrest/error.hpp"
#include "scafrest/png_io.hpp"
#include "scafrest/raster.hpp"

namespace scafrest {
namespace {

using testing::TempDir;

TEST(Raster, ConstructorClampsSamples) {
  Raster r(2, 1, ColorSpace::Gray, std::vector<float>{-0.5f, 1.5f});
  EXPECT_EQ(r.at(0, 0, 0), 0.0f);
  EXPECT_EQ(r.at(1, 0, 0), 1.0f);
  r.set(0, 0, 0, 7.0f);
  EXPECT_EQ(r.at(0, 0, 0), 1.0f);
}

TEST(Raster, LengthMismatchThrows) {
  EXPECT_THROW(Raster(2, 2, ColorSpace::RGB, std::vector<float>(11)), InvalidArgument);
}

TEST(BinaryMask, CoverageAndComplement) {
  BinaryMask m(2, 2);
  m.set(1, 0, true);
  EXPECT_DOUBLE_EQ(m.coverage(), 0.25);
  EXPECT_EQ(m.complement().count(), 3u);
  EXPECT_DOUBLE_EQ(BinaryMask(3, 3, true).coverage(), 1.0);
}

TEST(ToGray, Bt601Weights) {
  Raster rgb(3, 1, ColorSpace::RGB, std::vector<float>{1, 1, 1, 0, 0, 0, 1, 0, 0});
  const Raster g = to_gray(rgb);
  ASSERT_EQ(g.channels(), 1);
  EXPECT_NEAR(g.at(0, 0, 0), 1.0, 1e-6);
  EXPECT_EQ(g.at(1, 0, 0), 0.0f);
  EXPECT_NEAR(g.at(2, 0, 0), 0.299, 1e-6);
  const Raster gray(2, 2, ColorSpace::Gray, 0.3f);
  EXPECT_EQ(to_gray(gray), gray);
}

TEST(BilinearResample, AlignCornersHandExample) {
  const Raster src(2, 1, ColorSpace::Gray, std::vector<float>{0.0f, 1.0f});
  const Raster out = bilinear_resample(src, 3, 1);
  EXPECT_EQ(out.at(0, 0, 0), 0.0f);
  EXPECT_EQ(out.at(1, 0, 0), 0.5f);
  EXPECT_EQ(out.at(2, 0, 0), 1.0f);
}

TEST(BilinearResample, IdentitySizeIsBitIdentical) {
  std::mt19937_64 rng(1);
  const Raster r = testing::random_raster(7, 5, ColorSpace::RGBA, rng);
  EXPECT_EQ(bilinear_resample(r, 7, 5), r);
}

TEST(BilinearResample, ConstantStaysExactlyConstant) {
  const Raster c(5, 4, ColorSpace::RGB, 0.37f);
  for (auto [w, h] : {std::pair{1, 1}, {3, 9}, {17, 2}, {64, 64}}) {
    const Raster out = bilinear_resample(c, w, h);
    for (float v : out.samples()) ASSERT_EQ(v, 0.37f);
  }
}

TEST(BilinearResample, ZeroTargetThrows) {
  EXPECT_THROW(bilinear_resample(Raster(2, 2, ColorSpace::Gray), 0, 3), InvalidArgument);
}

TEST(Rotate, ZeroAnd360AreIdentity) {
  std::mt19937_64 rng(2);
  const Raster r = testing::random_raster(9, 6, ColorSpace::RGBA, rng);
  EXPECT_EQ(rotate(r, 0.0), r);
  const Raster full = rotate(r, 360.0);
  for (std::size_t i = 0; i < r.samples().size(); ++i) ASSERT_NEAR(full.samples()[i], r.samples()[i], 1e-6);
}

TEST(Rotate, QuarterTurnMovesLabeledGrid) {
  const int w = 5;
  std::vector<float> labels(w * w);
  for (int i = 0; i < w * w; ++i) labels[std::size_t(i)] = float(i) / float(w * w);
  const Raster src(w, w, ColorSpace::Gray, labels);
  const Raster out = rotate(src, 90.0);
  for (int y = 0; y < w; ++y)
    for (int x = 0; x < w; ++x) ASSERT_NEAR(out.at(y, w - 1 - x, 0), src.at(x, y, 0), 1e-6) << x << "," << y;
}

TEST(Rotate, RightAnglesPreserveAlphaMass) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 4 + int(rng() % 12);
    const Raster r = testing::random_raster(w, w, ColorSpace::RGBA, rng);
    double mass = 0.0;
    for (int y = 0; y < w; ++y)
      for (int x = 0; x < w; ++x) mass += r.at(x, y, 3);
    for (double a : {90.0, 180.0, 270.0, -90.0}) {
      const Raster o = rotate(r, a);
      double m2 = 0.0;
      for (int y = 0; y < w; ++y)
        for (int x = 0; x < w; ++x) m2 += o.at(x, y, 3);
      ASSERT_NEAR(m2, mass, 1e-6 * std::max(1.0, mass));
    }
  }
}

TEST(Rotate, OutsideSourceTakesFill) {
  const Raster r(8, 8, ColorSpace::RGBA, 1.0f);
  const Raster o = rotate(r, 45.0);
  EXPECT_EQ(o.at(0, 0, 3), 0.0f);
  EXPECT_EQ(o.at(4, 4, 3), 1.0f);
}

TEST(PngIo, QuantizationRule) {
  EXPECT_EQ(quantize8(1.0f), 255);
  EXPECT_EQ(quantize8(0.0f), 0);
  EXPECT_EQ(quantize8(0.5f), 128);
}

TEST(PngIo, KnownByteValues) {
  TempDir dir;
  const Raster r(3, 1, ColorSpace::Gray, std::vector<float>{1.0f, 0.0f, 0.5f});
  save_png(r, dir / "g.png");
  const Raster back = load_png(dir / "g.png");
  EXPECT_EQ(back.at(0, 0, 0), 1.0f);
  EXPECT_EQ(back.at(1, 0, 0), 0.0f);
  EXPECT_FLOAT_EQ(back.at(2, 0, 0), 128.0f / 255.0f);
}

TEST(PngIo, RoundTripWithinHalfStep) {
  TempDir dir;
  std::mt19937_64 rng(4);
  for (ColorSpace s : {ColorSpace::Gray, ColorSpace::RGB, ColorSpace::RGBA}) {
    const Raster r = testing::random_raster(13, 7, s, rng);
    save_png(r, dir / "x.png");
    const Raster back = load_png(dir / "x.png");
    ASSERT_EQ(back.space(), s);
    for (std::size_t i = 0; i < r.samples().size(); ++i) {
      ASSERT_LE(std::abs(back.samples()[i] - r.samples()[i]), 1.0 / 510.0 + 1e-7);
    }
  }
}

TEST(PngIo, MaskStoredAs255) {
  TempDir dir;
  BinaryMask m(3, 2);
  m.set(2, 1, true);
  save_png(m, dir / "m.png");
  const Raster raw = load_png(dir / "m.png");
  EXPECT_EQ(raw.channels(), 1);
  EXPECT_EQ(raw.at(2, 1, 0), 1.0f);
  EXPECT_EQ(raw.at(0, 0, 0), 0.0f);
  EXPECT_EQ(load_mask_png(dir / "m.png"), m);
}

void write_gray16(const std::filesystem::path& path, const std::vector<std::uint16_t>& values, int w) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  ASSERT_NE(fp, nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, fp);
  png_set_IHDR(png, info, png_uint_32(w), 1, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row;
  for (std::uint16_t v : values) {
    row.push_back(png_byte(v >> 8));
    row.push_back(png_byte(v & 0xff));
  }
  png_write_row(png, row.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

TEST(PngIo, SixteenBitDividesBy65535) {
  TempDir dir;
  write_gray16(dir / "d16.png", {0, 65535, 32768, 257}, 4);
  const Raster r = load_png(dir / "d16.png");
  ASSERT_EQ(r.width(), 4);
  EXPECT_EQ(r.at(0, 0, 0), 0.0f);
  EXPECT_EQ(r.at(1, 0, 0), 1.0f);
  EXPECT_FLOAT_EQ(r.at(2, 0, 0), float(32768.0 / 65535.0));
  EXPECT_FLOAT_EQ(r.at(3, 0, 0), float(257.0 / 65535.0));
}

TEST(PngIo, MissingFileThrows) {
  EXPECT_THROW(load_png("/nonexistent/none.png"), IoError);
}

TEST(PngIo, CorruptStreamThrows) {
  TempDir dir;
  {
    std::ofstream f(dir / "bad.png", std::ios::binary);
    f << "\x89PNG\r\n\x1a\nthis is not a png";
  }
  EXPECT_THROW(load_png(dir / "bad.png"), IoError);
}

}  // namespace
}  // namespace scafrest
