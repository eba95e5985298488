#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scafrest/raster.hpp"

namespace scafrest {

/// Scaffold-proportion intervals: (0,0.2], (0.2,0.4], (0.4,0.6], (0.6,0.8], (0.8,1.0).
enum class ProportionBucket { To02 = 0, To04, To06, To08, Below1 };

inline constexpr std::size_t kBucketCount = 5;
inline constexpr std::array<ProportionBucket, kBucketCount> kAllBuckets = {
    ProportionBucket::To02, ProportionBucket::To04, ProportionBucket::To06,
    ProportionBucket::To08, ProportionBucket::Below1};

/// Interval label as printed in dataset tables, e.g. "(0.2, 0.4]".
std::string_view bucket_label(ProportionBucket b);
std::optional<ProportionBucket> parse_bucket(std::string_view label);

/// Interval containing `proportion`; nullopt marks a degenerate sample
/// (proportion exactly 0 or 1). Throws InvalidArgument outside [0,1].
std::optional<ProportionBucket> classify_bucket(double proportion);

enum class Split { Train = 0, Val, Test, ExtTest };
inline constexpr std::size_t kSplitCount = 4;
inline constexpr std::array<Split, kSplitCount> kAllSplits = {Split::Train, Split::Val, Split::Test,
                                                              Split::ExtTest};
std::string_view split_name(Split s);
std::optional<Split> parse_split(std::string_view name);

struct SplitFractions {
  double train = 0.9;
  double val = 0.05;
  double test = 0.05;
};

struct SynthesisConfig {
  std::filesystem::path scaffold_dir;
  std::filesystem::path activity_dir;
  std::filesystem::path out_dir;
  int target_w = 512;
  int target_h = 512;
  double alpha_threshold = 0.5;
  double rotation_lo = 0.0;
  double rotation_hi = 360.0;
  std::uint64_t seed = 0;
  SplitFractions split;
  float hole_fill = 0.0f;
  /// Every record goes to the ext_test split (held-out generalization set).
  bool ext_test = false;
  /// Worker threads for rendering; 0 picks the hardware concurrency.
  int threads = 0;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct SampleRecord {
  std::string id;
  std::string scaffold_src;
  std::string activity_src;
  double angle = 0.0;
  double proportion = 0.0;
  std::optional<ProportionBucket> bucket;  // nullopt: degenerate
  Split split = Split::Train;
  // Relative to the manifest directory; absent in manifest-only runs.
  std::optional<std::string> overlay_path;
  std::optional<std::string> mask_path;
  std::optional<std::string> hole_path;
  std::optional<std::string> gt_path;

  bool degenerate() const { return !bucket.has_value(); }
  bool rendered() const { return overlay_path && mask_path && hole_path && gt_path; }
  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

/// Per-(split, bucket) tallies; degenerate samples are kept in their own column.
class CountTable {
 public:
  void add(Split s, std::optional<ProportionBucket> b);
  std::size_t at(Split s, ProportionBucket b) const { return cells_[idx(s)][std::size_t(b)]; }
  std::size_t degenerate(Split s) const { return cells_[idx(s)][kBucketCount]; }
  std::size_t split_total(Split s) const;
  std::size_t bucket_total(ProportionBucket b) const;
  std::size_t total() const;

  void set(Split s, std::optional<ProportionBucket> b, std::size_t n);
  friend bool operator==(const CountTable&, const CountTable&) = default;

 private:
  static std::size_t idx(Split s) { return std::size_t(s); }
  std::array<std::array<std::size_t, kBucketCount + 1>, kSplitCount> cells_{};
};

struct DatasetManifest {
  static constexpr int kFormatVersion = 1;
  SynthesisConfig config;
  std::vector<SampleRecord> records;
  CountTable counts;
};

/// True iff alpha > threshold (strict). Throws InvalidArgument for non-RGBA input.
BinaryMask binarize(const Raster& cutout, double alpha_threshold);

/// Source-over compositing: out = a * cutout_rgb + (1 - a) * activity_rgb.
Raster overlay(const Raster& activity, const Raster& cutout);

/// Copies `activity`, setting every channel of mask-true pixels to `hole_fill`.
Raster subtract(const Raster& activity, const BinaryMask& mask, float hole_fill);

double scaffold_proportion(const BinaryMask& mask);

struct SynthesizedSample {
  Raster overlay;
  BinaryMask mask;
  Raster hole;
  Raster gt;
  SampleRecord record;
};

/// Resample cutout to the target frame, rotate, binarize, overlay, subtract.
/// The returned record carries angle, proportion, and bucket; ids, sources,
/// split, and paths are left for the caller.
SynthesizedSample synthesize_sample(const Raster& scaffold, const Raster& activity, double angle,
                                    const SynthesisConfig& cfg);

/// Rotation angle for pair `pair_index`; a pure function of (seed, pair_index).
double sample_angle(const SynthesisConfig& cfg, std::uint64_t pair_index);

/// Split of every record position for a dataset of `total` samples.
std::vector<Split> assign_splits(const SynthesisConfig& cfg, std::size_t total);

/// PNG files in `dir`, sorted by file name.
std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir);

/// Pairs every scaffold cutout with every activity image. When `manifest_only`
/// is false, writes out_dir/{overlay,mask,hole,gt}/<id>.png. Masks are always
/// rendered in memory so proportions are exact.
DatasetManifest synthesize_dataset(const SynthesisConfig& cfg, bool manifest_only);

CountTable manifest_counts(const DatasetManifest& manifest);

}  // namespace scafrest
