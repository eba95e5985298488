#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "scafrest/cr_kernel.hpp"
#include "scafrest/raster.hpp"
#include "scafrest/report.hpp"
#include "scafrest/synthesis.hpp"

namespace scafrest {

// ---------------------------------------------------------------------------
// Step 1: scaffold masks.

enum class SegmenterKind {
  /// Ground-truth mask of a synthesized sample.
  Oracle,
  /// Mask file supplied by the caller.
  External,
  /// Luminance and saturation window; a stand-in for a trained segmenter.
  Threshold,
};

/// A pixel is scaffold when lum_min <= luminance <= lum_max and
/// (max(rgb) - min(rgb)) <= max_saturation.
struct ThresholdRule {
  double lum_min = 0.0;
  double lum_max = 1.0;
  double max_saturation = 1.0;
};

struct SegmenterSpec {
  SegmenterKind kind = SegmenterKind::Oracle;
  ThresholdRule rule;
  std::filesystem::path external_mask;

  std::string describe() const;
};

/// Where oracle masks come from.
struct SegmentContext {
  const SampleRecord* record = nullptr;
  std::filesystem::path dataset_dir;
};

BinaryMask segment(const Raster& input, const SegmenterSpec& spec, const SegmentContext& ctx = {});

// ---------------------------------------------------------------------------
// Step 2: inpainting of the masked pixels.

enum class InpainterKind {
  CrPatch,
  DiffusionFill,
  /// Debug provider for end-to-end audits: returns the ground truth.
  IdentityDebug,
};

struct DiffusionParams {
  int max_iters = 2000;
  double epsilon = 1e-5;
};

struct InpainterSpec {
  InpainterKind kind = InpainterKind::CrPatch;
  CRConfig cr;
  int pyramid_levels = 3;
  DiffusionParams diffusion;

  void validate() const;
  std::string describe() const;
};

/// Gauss-Seidel neighbour averaging over the masked pixels, seeded with the
/// mean of the known pixels. Stops when the largest update drops below epsilon.
Raster diffusion_fill(const Raster& hole, const BinaryMask& mask, const DiffusionParams& params);

/// Fills the mask-true pixels of `hole`; mask-false pixels are returned
/// unchanged. IdentityDebug requires `gt`. Throws UninpaintableError at
/// full coverage.
Raster inpaint(const Raster& hole, const BinaryMask& mask, const InpainterSpec& spec, const Raster* gt = nullptr);

// ---------------------------------------------------------------------------
// Evaluation over a rendered dataset.

struct EvalOptions {
  std::string dataset_name = "dataset";
  /// Restrict to one split; all records when empty.
  std::optional<Split> split;
  int embedding_side = 8;
  std::uint64_t seed = 0;
  int threads = 0;
};

/// Segments, inpaints, and scores every non-degenerate record of `manifest`
/// whose files live under `dataset_dir`. Per-sample failures are counted and
/// excluded from the aggregates.
RunReport evaluate_run(const DatasetManifest& manifest, const std::filesystem::path& dataset_dir,
                       const SegmenterSpec& seg, const InpainterSpec& inp, const EvalOptions& opts);

}  // namespace scafrest
