#include "scafrest/synthesis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <fmt/format.h>

#include "scafrest/error.hpp"
#include "scafrest/parallel.hpp"
#include "scafrest/png_io.hpp"

namespace scafrest {
namespace {

constexpr std::array<std::string_view, kBucketCount> kBucketLabels = {
    "(0, 0.2]", "(0.2, 0.4]", "(0.4, 0.6]", "(0.6, 0.8]", "(0.8, 1.0)"};
constexpr std::array<std::string_view, kSplitCount> kSplitNames = {"train", "val", "test",
                                                                   "ext_test"};

// splitmix64 finalizer; decorrelates nearby seeds and pair indices.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kSplitStream = 0x5350'4c49'5453'4844ULL;

double unit_interval(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

// Unbiased integer in [0, bound) by rejection; portable across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

Raster as_rgb(const Raster& img) {
  if (img.space() == ColorSpace::RGB) return img;
  if (img.space() == ColorSpace::RGBA) return to_rgb(img);
  std::vector<float> out(img.pixel_count() * 3);
  const auto s = img.samples();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) out[3 * i] = out[3 * i + 1] = out[3 * i + 2] = s[i];
  return Raster(img.width(), img.height(), ColorSpace::RGB, std::move(out));
}

BinaryMask threshold(const Raster& alpha, double alpha_threshold) {
  const auto s = alpha.samples();
  std::vector<std::uint8_t> bits(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) bits[i] = double(s[i]) > alpha_threshold ? 1 : 0;
  return BinaryMask(alpha.width(), alpha.height(), std::move(bits));
}

Raster load_cutout(const std::filesystem::path& path, const SynthesisConfig& cfg) {
  Raster img = load_png(path);
  if (img.space() != ColorSpace::RGBA) {
    throw InvalidArgument("scaffold cutout '" + path.string() + "' is not RGBA");
  }
  return bilinear_resample(img, cfg.target_w, cfg.target_h);
}

std::string record_id(std::size_t scaffold, std::size_t activity) {
  return fmt::format("s{:04d}_a{:04d}", scaffold, activity);
}

}  // namespace

std::string_view bucket_label(ProportionBucket b) { return kBucketLabels[std::size_t(b)]; }

std::optional<ProportionBucket> parse_bucket(std::string_view label) {
  for (std::size_t i = 0; i < kBucketCount; ++i) {
    if (kBucketLabels[i] == label) return ProportionBucket(i);
  }
  return std::nullopt;
}

std::optional<ProportionBucket> classify_bucket(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument(fmt::format("proportion {} outside [0, 1]", p));
  }
  if (p == 0.0 || p == 1.0) return std::nullopt;
  if (p <= 0.2) return ProportionBucket::To02;
  if (p <= 0.4) return ProportionBucket::To04;
  if (p <= 0.6) return ProportionBucket::To06;
  if (p <= 0.8) return ProportionBucket::To08;
  return ProportionBucket::Below1;
}

std::string_view split_name(Split s) { return kSplitNames[std::size_t(s)]; }

std::optional<Split> parse_split(std::string_view name) {
  for (std::size_t i = 0; i < kSplitCount; ++i) {
    if (kSplitNames[i] == name) return Split(i);
  }
  return std::nullopt;
}

void SynthesisConfig::validate() const {
  if (target_w < 1 || target_h < 1) throw InvalidArgument("target size must be positive");
  if (!(alpha_threshold > 0.0 && alpha_threshold < 1.0)) {
    throw InvalidArgument("alpha_threshold must lie in (0, 1)");
  }
  if (!(rotation_lo <= rotation_hi)) throw InvalidArgument("rotation range is empty");
  if (split.train < 0 || split.val < 0 || split.test < 0) {
    throw InvalidArgument("split fractions must be nonnegative");
  }
  if (std::abs(split.train + split.val + split.test - 1.0) > 1e-9) {
    throw InvalidArgument("split fractions must sum to 1");
  }
  if (!(hole_fill >= 0.0f && hole_fill <= 1.0f)) throw InvalidArgument("hole_fill must lie in [0, 1]");
}

void CountTable::add(Split s, std::optional<ProportionBucket> b) {
  ++cells_[idx(s)][b ? std::size_t(*b) : kBucketCount];
}

void CountTable::set(Split s, std::optional<ProportionBucket> b, std::size_t n) {
  cells_[idx(s)][b ? std::size_t(*b) : kBucketCount] = n;
}

std::size_t CountTable::split_total(Split s) const {
  std::size_t n = 0;
  for (std::size_t v : cells_[idx(s)]) n += v;
  return n;
}

std::size_t CountTable::bucket_total(ProportionBucket b) const {
  std::size_t n = 0;
  for (const auto& row : cells_) n += row[std::size_t(b)];
  return n;
}

std::size_t CountTable::total() const {
  std::size_t n = 0;
  for (Split s : kAllSplits) n += split_total(s);
  return n;
}

BinaryMask binarize(const Raster& cutout, double alpha_threshold) {
  if (cutout.space() != ColorSpace::RGBA) throw InvalidArgument("binarize requires an RGBA cutout");
  return threshold(cutout.channel(3), alpha_threshold);
}

Raster overlay(const Raster& activity, const Raster& cutout) {
  if (activity.width() != cutout.width() || activity.height() != cutout.height()) {
    throw InvalidArgument("overlay: dimension mismatch");
  }
  if (cutout.space() != ColorSpace::RGBA) throw InvalidArgument("overlay: cutout must be RGBA");
  const Raster base = as_rgb(activity);
  std::vector<float> out(base.pixel_count() * 3);
  const auto a = base.samples();
  const auto c = cutout.samples();
  for (std::size_t i = 0; i < base.pixel_count(); ++i) {
    const double alpha = c[4 * i + 3];
    for (std::size_t k = 0; k < 3; ++k) {
      out[3 * i + k] = float(alpha * double(c[4 * i + k]) + (1.0 - alpha) * double(a[3 * i + k]));
    }
  }
  return Raster(base.width(), base.height(), ColorSpace::RGB, std::move(out));
}

Raster subtract(const Raster& activity, const BinaryMask& mask, float hole_fill) {
  if (activity.width() != mask.width() || activity.height() != mask.height()) {
    throw InvalidArgument("subtract: dimension mismatch");
  }
  const int ch = activity.channels();
  std::vector<float> out(activity.samples().begin(), activity.samples().end());
  const auto bits = mask.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) std::fill_n(out.begin() + std::ptrdiff_t(i) * ch, ch, hole_fill);
  }
  return Raster(activity.width(), activity.height(), activity.space(), std::move(out));
}

double scaffold_proportion(const BinaryMask& mask) { return mask.coverage(); }

SynthesizedSample synthesize_sample(const Raster& scaffold, const Raster& activity, double angle,
                                    const SynthesisConfig& cfg) {
  if (scaffold.space() != ColorSpace::RGBA) throw InvalidArgument("scaffold cutout must be RGBA");
  const Raster cutout = rotate(bilinear_resample(scaffold, cfg.target_w, cfg.target_h), angle, 0.0f);
  SynthesizedSample s;
  s.gt = bilinear_resample(as_rgb(activity), cfg.target_w, cfg.target_h);
  s.mask = binarize(cutout, cfg.alpha_threshold);
  s.overlay = overlay(s.gt, cutout);
  s.hole = subtract(s.gt, s.mask, cfg.hole_fill);
  s.record.angle = angle;
  s.record.proportion = scaffold_proportion(s.mask);
  s.record.bucket = classify_bucket(s.record.proportion);
  return s;
}

double sample_angle(const SynthesisConfig& cfg, std::uint64_t pair_index) {
  std::mt19937_64 rng(mix64(cfg.seed ^ mix64(pair_index)));
  if (cfg.rotation_hi == cfg.rotation_lo) return cfg.rotation_lo;
  return cfg.rotation_lo + unit_interval(rng) * (cfg.rotation_hi - cfg.rotation_lo);
}

std::vector<Split> assign_splits(const SynthesisConfig& cfg, std::size_t total) {
  if (cfg.ext_test) return std::vector<Split>(total, Split::ExtTest);

  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  std::mt19937_64 rng(mix64(cfg.seed ^ kSplitStream));
  for (std::size_t i = total; i > 1; --i) {
    std::swap(order[i - 1], order[bounded(rng, i)]);
  }

  const auto n_train = std::min<std::size_t>(total, std::size_t(std::llround(cfg.split.train * double(total))));
  const auto n_val = std::min<std::size_t>(total - n_train, std::size_t(std::llround(cfg.split.val * double(total))));
  std::vector<Split> splits(total, Split::Test);
  for (std::size_t k = 0; k < n_train; ++k) splits[order[k]] = Split::Train;
  for (std::size_t k = n_train; k < n_train + n_val; ++k) splits[order[k]] = Split::Val;
  return splits;
}

std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw IoError("'" + dir.string() + "' is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return char(std::tolower(ch)); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

DatasetManifest synthesize_dataset(const SynthesisConfig& cfg, bool manifest_only) {
  cfg.validate();
  const auto scaffolds = list_png_files(cfg.scaffold_dir);
  const auto activities = list_png_files(cfg.activity_dir);
  if (scaffolds.empty()) throw IoError("no PNG cutouts in '" + cfg.scaffold_dir.string() + "'");
  if (activities.empty()) throw IoError("no PNG images in '" + cfg.activity_dir.string() + "'");

  const std::size_t m = scaffolds.size();
  const std::size_t n = activities.size();
  const std::size_t total = m * n;

  if (!manifest_only) {
    if (cfg.out_dir.empty()) throw InvalidArgument("out_dir is required to render images");
    for (const char* sub : {"overlay", "mask", "hole", "gt"}) {
      std::error_code ec;
      std::filesystem::create_directories(cfg.out_dir / sub, ec);
      if (ec) throw IoError("cannot create '" + (cfg.out_dir / sub).string() + "': " + ec.message());
    }
  }

  // Resampled sources are shared read-only by every pair that uses them.
  std::vector<Raster> cutouts(m);
  parallel_for(m, cfg.threads, [&](std::size_t i) {
    Raster c = load_cutout(scaffolds[i], cfg);
    cutouts[i] = manifest_only ? c.channel(3) : std::move(c);
  });
  std::vector<Raster> backgrounds;
  if (!manifest_only) {
    backgrounds.resize(n);
    parallel_for(n, cfg.threads, [&](std::size_t j) {
      backgrounds[j] = bilinear_resample(as_rgb(load_png(activities[j])), cfg.target_w, cfg.target_h);
    });
  }

  DatasetManifest manifest;
  manifest.config = cfg;
  manifest.records.resize(total);
  const auto splits = assign_splits(cfg, total);

  parallel_for(total, cfg.threads, [&](std::size_t pair) {
    const std::size_t i = pair / n;
    const std::size_t j = pair % n;
    SampleRecord& rec = manifest.records[pair];
    const double angle = sample_angle(cfg, pair);
    if (manifest_only) {
      // Rotating the alpha plane alone reproduces the RGBA path's alpha exactly.
      const BinaryMask mask = threshold(rotate(cutouts[i], angle, 0.0f), cfg.alpha_threshold);
      rec.angle = angle;
      rec.proportion = scaffold_proportion(mask);
      rec.bucket = classify_bucket(rec.proportion);
    } else {
      SynthesizedSample s = synthesize_sample(cutouts[i], backgrounds[j], angle, cfg);
      rec = std::move(s.record);
      const std::string id = record_id(i, j);
      rec.overlay_path = "overlay/" + id + ".png";
      rec.mask_path = "mask/" + id + ".png";
      rec.hole_path = "hole/" + id + ".png";
      rec.gt_path = "gt/" + id + ".png";
      save_png(s.overlay, cfg.out_dir / *rec.overlay_path);
      save_png(s.mask, cfg.out_dir / *rec.mask_path);
      save_png(s.hole, cfg.out_dir / *rec.hole_path);
      save_png(s.gt, cfg.out_dir / *rec.gt_path);
    }
    rec.id = record_id(i, j);
    rec.scaffold_src = scaffolds[i].string();
    rec.activity_src = activities[j].string();
    rec.split = splits[pair];
  });

  manifest.counts = manifest_counts(manifest);
  return manifest;
}

CountTable manifest_counts(const DatasetManifest& manifest) {
  CountTable t;
  for (const auto& r : manifest.records) t.add(r.split, r.bucket);
  return t;
}

}  // namespace scafrest
