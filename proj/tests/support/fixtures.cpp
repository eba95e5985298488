#include "fixtures.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "scafrest/manifest.hpp"
#include "scafrest/png_io.hpp"

namespace scafrest::testing {

TempDir::TempDir(const std::string& tag) {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    path_ = base / fmt::format("{}-{:016x}", tag, (std::uint64_t(rd()) << 32) ^ rd());
    if (std::filesystem::create_directories(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

Raster tube_cutout(int w, int h, const TubeSpec& spec) {
  Raster img(w, h, ColorSpace::RGBA);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool pole = (x + spec.phase_x) % spec.pole_period < spec.pole_width;
      const bool ledger = (y + spec.phase_y) % spec.ledger_period < spec.ledger_width;
      if (!pole && !ledger) continue;
      const float shade = pole ? 1.0f : 0.85f;
      img.set(x, y, 0, spec.r * shade);
      img.set(x, y, 1, spec.g * shade);
      img.set(x, y, 2, spec.b * shade);
      img.set(x, y, 3, 1.0f);
    }
  }
  return img;
}

Raster activity_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> freq(1, 3);
  Raster img(w, h, ColorSpace::RGB);
  for (int c = 0; c < 3; ++c) {
    const int fx1 = freq(rng), fy1 = freq(rng), fx2 = freq(rng), fy2 = freq(rng);
    const double p1 = phase(rng), p2 = phase(rng);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double u = double(x) / w, v = double(y) / h;
        const double s = 0.5 + 0.25 * std::sin(2.0 * std::numbers::pi * (fx1 * u + fy1 * v) + p1) +
                         0.15 * std::sin(2.0 * std::numbers::pi * (fx2 * u - fy2 * v) + p2);
        img.set(x, y, c, float(s));
      }
    }
  }
  return img;
}

Raster random_raster(int w, int h, ColorSpace space, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> data(std::size_t(w) * std::size_t(h) * std::size_t(channel_count(space)));
  for (float& v : data) v = u(rng);
  return Raster(w, h, space, std::move(data));
}

BinaryMask random_mask(int w, int h, double p_true, std::mt19937_64& rng) {
  std::bernoulli_distribution b(p_true);
  std::vector<std::uint8_t> bits(std::size_t(w) * std::size_t(h));
  for (auto& v : bits) v = b(rng) ? 1 : 0;
  return BinaryMask(w, h, std::move(bits));
}

void write_pngs(const std::filesystem::path& dir, const std::string& prefix, const std::vector<Raster>& images) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < images.size(); ++i) save_png(images[i], dir / fmt::format("{}{:03d}.png", prefix, i));
}

std::vector<TubeSpec> five_bucket_tubes() {
  return {
      {16, 1, 32, 1, 3, 5, 0.5f, 0.5f, 0.55f},  // ~0.09
      {8, 2, 16, 1, 1, 2, 0.6f, 0.55f, 0.5f},   // ~0.30
      {8, 3, 8, 2, 0, 0, 0.45f, 0.5f, 0.6f},    // ~0.53
      {8, 4, 8, 3, 2, 1, 0.7f, 0.6f, 0.4f},     // ~0.69
      {4, 3, 4, 2, 0, 1, 0.5f, 0.5f, 0.5f},     // ~0.88
  };
}

std::vector<TubeSpec> trend_tubes() {
  return {
      {16, 1, 32, 1, 3, 5, 0.5f, 0.5f, 0.55f},
      {20, 1, 20, 1, 7, 2, 0.6f, 0.5f, 0.5f},
      {12, 1, 40, 1, 1, 9, 0.4f, 0.45f, 0.6f},
      {8, 2, 16, 1, 1, 2, 0.6f, 0.55f, 0.5f},
      {10, 2, 12, 1, 4, 3, 0.5f, 0.6f, 0.5f},
      {16, 4, 16, 1, 0, 6, 0.55f, 0.5f, 0.45f},
      {8, 3, 8, 2, 0, 0, 0.45f, 0.5f, 0.6f},
      {10, 4, 10, 2, 3, 1, 0.6f, 0.5f, 0.55f},
      {6, 2, 12, 3, 2, 4, 0.5f, 0.45f, 0.5f},
      {8, 4, 8, 3, 2, 1, 0.7f, 0.6f, 0.4f},
      {10, 5, 10, 4, 1, 2, 0.5f, 0.55f, 0.6f},
      {6, 3, 6, 2, 0, 3, 0.6f, 0.6f, 0.6f},
  };
}

DatasetManifest render_desk_dataset(const std::filesystem::path& root, const DeskSpec& spec) {
  std::vector<Raster> cutouts, activities;
  for (const auto& t : spec.tubes) cutouts.push_back(tube_cutout(spec.size, spec.size, t));
  for (int i = 0; i < spec.activities; ++i) {
    activities.push_back(activity_image(spec.size, spec.size, spec.seed * 1000 + std::uint64_t(i)));
  }
  write_pngs(root / "src" / "scaffolds", "s", cutouts);
  write_pngs(root / "src" / "activities", "a", activities);

  SynthesisConfig cfg;
  cfg.scaffold_dir = root / "src" / "scaffolds";
  cfg.activity_dir = root / "src" / "activities";
  cfg.out_dir = root / "data";
  cfg.target_w = spec.size;
  cfg.target_h = spec.size;
  cfg.rotation_lo = spec.rotation_lo;
  cfg.rotation_hi = spec.rotation_hi;
  cfg.seed = spec.seed;
  cfg.threads = 1;
  DatasetManifest m = synthesize_dataset(cfg, false);
  write_manifest(m, cfg.out_dir / "manifest.jsonl");
  return m;
}

}  // namespace scafrest::testing
