#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "scafrest/raster.hpp"
#include "scafrest/synthesis.hpp"

namespace scafrest::testing {

/// Directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "scafrest");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Grid of vertical poles and horizontal ledgers on a transparent canvas.
/// Opaque coverage is 1 - (1 - pole_width/pole_period)(1 - ledger_width/ledger_period).
struct TubeSpec {
  int pole_period = 8;
  int pole_width = 2;
  int ledger_period = 8;
  int ledger_width = 1;
  int phase_x = 0;
  int phase_y = 0;
  float r = 0.55f, g = 0.55f, b = 0.6f;
};

Raster tube_cutout(int w, int h, const TubeSpec& spec);

/// Smooth periodic RGB texture; a pure function of (w, h, seed).
Raster activity_image(int w, int h, std::uint64_t seed);

Raster random_raster(int w, int h, ColorSpace space, std::mt19937_64& rng);
BinaryMask random_mask(int w, int h, double p_true, std::mt19937_64& rng);

void write_pngs(const std::filesystem::path& dir, const std::string& prefix, const std::vector<Raster>& images);

struct DeskSpec {
  std::vector<TubeSpec> tubes;
  int activities = 6;
  int size = 128;
  double rotation_lo = 0.0;
  double rotation_hi = 360.0;
  std::uint64_t seed = 7;
};

/// Tube specs whose unrotated coverage sits near 0.1, 0.3, 0.5, 0.7, and 0.9.
std::vector<TubeSpec> five_bucket_tubes();

/// Three variants per bucket for the first four buckets.
std::vector<TubeSpec> trend_tubes();

/// Writes sources under root/src and renders the dataset into root/data with
/// its manifest at root/data/manifest.jsonl.
DatasetManifest render_desk_dataset(const std::filesystem::path& root, const DeskSpec& spec);

}  // namespace scafrest::testing
