#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "scafrest/cr_kernel.hpp"
#include "scafrest/error.hpp"
#include "scafrest/synthesis.hpp"

namespace scafrest {
namespace {

FeatureMap random_feature(int h, int w, int c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FeatureMap f(h, w, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k) f.at(y, x, k) = u(rng);
  return f;
}

testing::Volume to_volume(const FeatureMap& f) {
  auto v = testing::make_volume(f.height(), f.width(), f.channels());
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x)
      for (int c = 0; c < f.channels(); ++c) v[std::size_t(y)][std::size_t(x)][std::size_t(c)] = f.at(y, x, c);
  return v;
}

std::vector<std::vector<bool>> to_rows(const BinaryMask& m) {
  std::vector<std::vector<bool>> r(std::size_t(m.height()), std::vector<bool>(std::size_t(m.width())));
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) r[std::size_t(y)][std::size_t(x)] = m.at(x, y);
  return r;
}

double max_deviation(const FeatureMap& f, const testing::Volume& v) {
  double worst = 0.0;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x)
      for (int c = 0; c < f.channels(); ++c)
        worst = std::max(worst, std::abs(f.at(y, x, c) - v[std::size_t(y)][std::size_t(x)][std::size_t(c)]));
  return worst;
}

FeatureMap run_kernel(const FeatureMap& f, const BinaryMask& m, const CRConfig& cfg) {
  const PatchGrid g = extract_patches(f, m, cfg);
  if (g.unknown.empty()) return f;
  return reconstruct_patches(g, similarity_matrix(g, cfg), f, cfg);
}

TEST(PatchOrigins, StrideGridWithFlushTail) {
  EXPECT_EQ(patch_origins(4, 2, 2), (std::vector<int>{0, 2}));
  EXPECT_EQ(patch_origins(5, 2, 2), (std::vector<int>{0, 2, 3}));
  EXPECT_EQ(patch_origins(7, 3, 1), (std::vector<int>{0, 1, 2, 3, 4}));
  EXPECT_EQ(patch_origins(3, 3, 2), (std::vector<int>{0}));
}

TEST(ExtractPatches, Partition) {
  CRConfig cfg;
  cfg.patch = 2;
  cfg.stride = 2;
  const FeatureMap f(4, 4, 1);
  const auto none = extract_patches(f, BinaryMask(4, 4), cfg);
  EXPECT_EQ(none.known.size(), 4u);
  EXPECT_TRUE(none.unknown.empty());
  const auto all = extract_patches(f, BinaryMask(4, 4, true), cfg);
  EXPECT_TRUE(all.known.empty());
  EXPECT_EQ(all.unknown.size(), 4u);
  BinaryMask one(4, 4);
  one.set(0, 0, true);
  const auto g = extract_patches(f, one, cfg);
  ASSERT_EQ(g.unknown.size(), 1u);
  EXPECT_EQ(g.positions[g.unknown[0]], (PatchPosition{0, 0}));
  EXPECT_EQ(g.known.size(), 3u);
  for (const auto& v : g.vectors) EXPECT_EQ(v.size(), g.patch_length());
}

TEST(ExtractPatches, Errors) {
  CRConfig cfg;
  EXPECT_THROW(extract_patches(FeatureMap(3, 8, 1), BinaryMask(8, 3), cfg), InvalidArgument);
  EXPECT_THROW(extract_patches(FeatureMap(8, 8, 1), BinaryMask(8, 7), cfg), InvalidArgument);
  cfg.stride = 5;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(SimilarityMatrix, CosineExamplesAndBounds) {
  CRConfig cfg;
  cfg.patch = 1;
  cfg.stride = 1;
  FeatureMap f(1, 4, 2);
  const double vals[4][2] = {{0.3, 0.7}, {0.3, 0.7}, {-0.7, 0.3}, {-0.3, -0.7}};
  for (int x = 0; x < 4; ++x)
    for (int c = 0; c < 2; ++c) f.at(0, x, c) = vals[x][c];
  BinaryMask m(4, 1);
  m.set(0, 0, true);
  // The only missing patch has nothing known inside, so full vectors are compared.
  const Eigen::MatrixXd s = similarity_matrix(extract_patches(f, m, cfg), cfg);
  ASSERT_EQ(s.rows(), 1);
  ASSERT_EQ(s.cols(), 3);
  EXPECT_NEAR(s(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(s(0, 1), 0.0, 1e-6);
  EXPECT_NEAR(s(0, 2), -1.0, 1e-6);

  std::mt19937_64 rng(31);
  for (int t = 0; t < 50; ++t) {
    CRConfig c2;
    c2.patch = 2;
    c2.stride = 1;
    const FeatureMap r = random_feature(5, 5, 2, rng);
    const BinaryMask mk = testing::random_mask(5, 5, 0.2, rng);
    const auto g = extract_patches(r, mk, c2);
    if (g.known.empty() || g.unknown.empty()) continue;
    const Eigen::MatrixXd sm = similarity_matrix(g, c2);
    ASSERT_LE(sm.cwiseAbs().maxCoeff(), 1.0 + 1e-9);
  }
}

TEST(SimilarityMatrix, EmptySetsSignal) {
  CRConfig cfg;
  cfg.patch = 2;
  cfg.stride = 2;
  const FeatureMap f(4, 4, 1);
  try {
    similarity_matrix(extract_patches(f, BinaryMask(4, 4, true), cfg), cfg);
    FAIL();
  } catch (const UninpaintableError& e) {
    EXPECT_NE(std::string(e.what()).find("uninpaintable"), std::string::npos);
  }
  EXPECT_THROW(similarity_matrix(extract_patches(f, BinaryMask(4, 4), cfg), cfg), InvalidArgument);
}

TEST(Softmax, RowsSumToOne) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-1, 1), a(0, 1e4);
  for (int i = 0; i < 500; ++i) {
    Eigen::VectorXd s(1 + int(rng() % 40));
    for (Eigen::Index k = 0; k < s.size(); ++k) s[k] = u(rng);
    const double alpha = i % 5 == 0 ? 0.0 : a(rng);
    const Eigen::VectorXd w = softmax_weights(s, alpha);
    ASSERT_NEAR(w.sum(), 1.0, 1e-9);
    ASSERT_GE(w.minCoeff(), 0.0);
  }
}

TEST(Reconstruct, AlphaZeroIsUniformMean) {
  std::mt19937_64 rng(33);
  CRConfig cfg;
  cfg.patch = 2;
  cfg.stride = 2;
  cfg.alpha = 0.0;
  const FeatureMap f = random_feature(4, 4, 1, rng);
  BinaryMask m(4, 4);
  m.set(3, 3, true);
  const FeatureMap out = run_kernel(f, m, cfg);
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx) {
      const double mean = (f.at(dy, dx, 0) + f.at(dy, 2 + dx, 0) + f.at(2 + dy, dx, 0)) / 3.0;
      EXPECT_NEAR(out.at(2 + dy, 2 + dx, 0), mean, 1e-15);
    }
}

TEST(Reconstruct, SingleKnownPatchIsCopiedExactly) {
  std::mt19937_64 rng(34);
  CRConfig cfg;
  cfg.patch = 2;
  cfg.stride = 2;
  const FeatureMap f = random_feature(4, 4, 2, rng);
  BinaryMask m(4, 4);
  m.set(0, 0, true);
  m.set(3, 0, true);
  m.set(0, 3, true);
  const FeatureMap out = run_kernel(f, m, cfg);
  for (auto [py, px] : {std::pair{0, 0}, {0, 2}, {2, 0}})
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx)
        for (int c = 0; c < 2; ++c) EXPECT_EQ(out.at(py + dy, px + dx, c), f.at(2 + dy, 2 + dx, c));
}

TEST(Reconstruct, HandSetSimilarities) {
  std::mt19937_64 rng(35);
  CRConfig cfg;
  cfg.patch = 2;
  cfg.stride = 2;
  cfg.alpha = 1.0;
  const FeatureMap f = random_feature(4, 4, 1, rng);
  BinaryMask m(4, 4);
  m.set(1, 1, true);
  const PatchGrid g = extract_patches(f, m, cfg);
  Eigen::MatrixXd s(1, 3);
  s << 0.2, -0.4, 0.9;
  const FeatureMap out = reconstruct_patches(g, s, f, cfg);
  const double z = std::exp(0.2) + std::exp(-0.4) + std::exp(0.9);
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx) {
      const double want = (std::exp(0.2) * f.at(dy, 2 + dx, 0) + std::exp(-0.4) * f.at(2 + dy, dx, 0) +
                           std::exp(0.9) * f.at(2 + dy, 2 + dx, 0)) / z;
      EXPECT_NEAR(out.at(dy, dx, 0), want, 1e-12);
    }
}

TEST(Reconstruct, MatchesBruteForceOnRandomFixtures) {
  std::mt19937_64 rng(36);
  int compared = 0;
  for (int t = 0; t < 400; ++t) {
    const int h = 2 + int(rng() % 5), w = 2 + int(rng() % 5), c = 1 + int(rng() % 2);
    CRConfig cfg;
    cfg.patch = 1 + int(rng() % std::min(h, w));
    cfg.stride = 1 + int(rng() % cfg.patch);
    cfg.alpha = std::uniform_real_distribution<double>(0, 20)(rng);
    const FeatureMap f = random_feature(h, w, c, rng);
    const BinaryMask m = testing::random_mask(w, h, 0.3, rng);
    const auto want = testing::cr_bruteforce(to_volume(f), to_rows(m), cfg.patch, cfg.stride, cfg.alpha);
    if (!want) {
      EXPECT_THROW(run_kernel(f, m, cfg), UninpaintableError);
      continue;
    }
    ASSERT_LT(max_deviation(run_kernel(f, m, cfg), *want), 1e-6) << h << "x" << w << "x" << c;
    ++compared;
  }
  EXPECT_GT(compared, 200);
}

TEST(Reconstruct, KnownOnlyPixelsUntouched) {
  std::mt19937_64 rng(37);
  for (int t = 0; t < 100; ++t) {
    CRConfig cfg;
    cfg.patch = 3;
    cfg.stride = 2;
    const FeatureMap f = random_feature(9, 9, 1, rng);
    const BinaryMask m = testing::random_mask(9, 9, 0.05, rng);
    const PatchGrid g = extract_patches(f, m, cfg);
    if (g.known.empty() || g.unknown.empty()) continue;
    const FeatureMap out = reconstruct_patches(g, similarity_matrix(g, cfg), f, cfg);
    std::vector<bool> in_missing(81, false);
    for (std::size_t i : g.unknown)
      for (int dy = 0; dy < 3; ++dy)
        for (int dx = 0; dx < 3; ++dx)
          in_missing[std::size_t((g.positions[i].y + dy) * 9 + g.positions[i].x + dx)] = true;
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 9; ++x)
        if (!in_missing[std::size_t(y * 9 + x)]) ASSERT_EQ(out.at(y, x, 0), f.at(y, x, 0));
  }
}

TEST(Reconstruct, HighTemperatureSelectsBestPatch) {
  CRConfig cfg;
  cfg.patch = 1;
  cfg.stride = 1;
  cfg.alpha = 1e4;
  FeatureMap f(1, 4, 2);
  const double vals[4][2] = {{1.0, 0.05}, {1.0, 0.0}, {0.0, 1.0}, {0.6, 0.8}};
  for (int x = 0; x < 4; ++x)
    for (int c = 0; c < 2; ++c) f.at(0, x, c) = vals[x][c];
  BinaryMask m(4, 1);
  m.set(0, 0, true);
  const FeatureMap out = run_kernel(f, m, cfg);
  EXPECT_LT(std::abs(out.at(0, 0, 0) - 1.0), 1e-4);
  EXPECT_LT(std::abs(out.at(0, 0, 1) - 0.0), 1e-4);
}

TEST(Reconstruct, PermutingKnownPatchesIsInvariant) {
  std::mt19937_64 rng(38);
  CRConfig cfg;
  cfg.patch = 2;
  cfg.stride = 1;
  const FeatureMap f = random_feature(6, 6, 2, rng);
  BinaryMask m(6, 6);
  m.set(2, 2, true);
  PatchGrid g = extract_patches(f, m, cfg);
  const FeatureMap base = reconstruct_patches(g, similarity_matrix(g, cfg), f, cfg);
  std::shuffle(g.known.begin(), g.known.end(), rng);
  const FeatureMap perm = reconstruct_patches(g, similarity_matrix(g, cfg), f, cfg);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x)
      for (int c = 0; c < 2; ++c) ASSERT_NEAR(perm.at(y, x, c), base.at(y, x, c), 1e-9);
}

TEST(CrLoss, SumOfPatchMeans) {
  CRConfig cfg;
  cfg.patch = 2;
  cfg.stride = 2;
  FeatureMap ref(4, 4, 1);
  BinaryMask m(4, 4);
  m.set(0, 0, true);
  m.set(3, 3, true);
  const PatchGrid g = extract_patches(ref, m, cfg);
  EXPECT_EQ(cr_loss(ref, ref, g, cfg), 0.0);
  FeatureMap rec = ref;
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx) {
      rec.at(dy, dx, 0) = 0.2;
      rec.at(2 + dy, 2 + dx, 0) = 0.5;
    }
  EXPECT_NEAR(cr_loss(rec, ref, g, cfg), 0.7, 1e-12);
  BinaryMask one(4, 4);
  one.set(0, 0, true);
  EXPECT_NEAR(cr_loss(rec, ref, extract_patches(ref, one, cfg), cfg), 0.2, 1e-12);
  EXPECT_THROW(cr_loss(FeatureMap(4, 4, 2), ref, g, cfg), InvalidArgument);
}

TEST(CrInpaint, EmptyMaskIsIdentity) {
  std::mt19937_64 rng(39);
  const Raster r = testing::random_raster(16, 16, ColorSpace::RGB, rng);
  EXPECT_EQ(cr_inpaint(r, BinaryMask(16, 16), CRConfig{}), r);
}

TEST(CrInpaint, ConstantImageStaysConstant) {
  std::mt19937_64 rng(40);
  const Raster c(24, 20, ColorSpace::RGB, 0.42f);
  for (int t = 0; t < 5; ++t) {
    const BinaryMask m = testing::random_mask(24, 20, 0.4, rng);
    const Raster hole = subtract(c, m, 0.0f);
    const Raster out = cr_inpaint(hole, m, CRConfig{});
    for (float v : out.samples()) ASSERT_NEAR(v, 0.42f, 1e-6);
  }
}

TEST(CrInpaint, KnownPixelsExactAndFullMaskRejected) {
  std::mt19937_64 rng(41);
  const Raster img = testing::activity_image(32, 32, 5);
  const BinaryMask m = testing::random_mask(32, 32, 0.5, rng);
  const Raster hole = subtract(img, m, 0.0f);
  const Raster out = cr_inpaint(hole, m, CRConfig{});
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      if (!m.at(x, y))
        for (int c = 0; c < 3; ++c) ASSERT_EQ(out.at(x, y, c), hole.at(x, y, c));
  EXPECT_THROW(cr_inpaint(hole, BinaryMask(32, 32, true), CRConfig{}), UninpaintableError);
}

TEST(CrInpaint, StripeTextureWithOneMissingPatch) {
  std::vector<float> v(32 * 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) v[std::size_t(y * 32 + x)] = (x / 2) % 2 ? 0.8f : 0.2f;
  const Raster gt(32, 32, ColorSpace::Gray, v);
  BinaryMask m(32, 32);
  for (int y = 12; y < 16; ++y)
    for (int x = 12; x < 16; ++x) m.set(x, y, true);
  CRConfig cfg;
  const Raster out = cr_inpaint(subtract(gt, m, 0.0f), m, cfg, 1);
  double err = 0.0;
  for (int y = 12; y < 16; ++y)
    for (int x = 12; x < 16; ++x) err += std::abs(out.at(x, y, 0) - gt.at(x, y, 0));
  EXPECT_LT(err / 16.0, 0.05);
}

}  // namespace
}  // namespace scafrest
