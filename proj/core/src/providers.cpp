#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "scafrest/error.hpp"
#include "scafrest/pipeline.hpp"
#include "scafrest/png_io.hpp"

namespace scafrest {
namespace {

void require_same_size(const Raster& img, const BinaryMask& mask, const char* op) {
  if (img.width() != mask.width() || img.height() != mask.height()) {
    throw InvalidArgument(fmt::format("{}: mask is {}x{} but image is {}x{}", op, mask.width(), mask.height(),
                                      img.width(), img.height()));
  }
}

BinaryMask threshold_segment(const Raster& input, const ThresholdRule& rule) {
  std::vector<std::uint8_t> bits(input.pixel_count());
  for (int y = 0; y < input.height(); ++y) {
    for (int x = 0; x < input.width(); ++x) {
      const auto px = input.pixel(x, y);
      double lum = 0.0, sat = 0.0;
      if (input.channels() >= 3) {
        lum = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
        sat = double(std::max({px[0], px[1], px[2]}) - std::min({px[0], px[1], px[2]}));
      } else {
        lum = px[0];
      }
      const bool hit = lum >= rule.lum_min && lum <= rule.lum_max && sat <= rule.max_saturation;
      bits[std::size_t(y) * std::size_t(input.width()) + std::size_t(x)] = hit ? 1 : 0;
    }
  }
  return BinaryMask(input.width(), input.height(), std::move(bits));
}

}  // namespace

std::string SegmenterSpec::describe() const {
  switch (kind) {
    case SegmenterKind::Oracle: return "oracle";
    case SegmenterKind::External: return "external(" + external_mask.string() + ")";
    case SegmenterKind::Threshold:
      return fmt::format("threshold(lum=[{}, {}], max_sat={})", rule.lum_min, rule.lum_max, rule.max_saturation);
  }
  return "unknown";
}

BinaryMask segment(const Raster& input, const SegmenterSpec& spec, const SegmentContext& ctx) {
  switch (spec.kind) {
    case SegmenterKind::Oracle: {
      if (!ctx.record || !ctx.record->mask_path) {
        throw InvalidArgument("oracle segmenter needs a rendered manifest record");
      }
      BinaryMask m = load_mask_png(ctx.dataset_dir / *ctx.record->mask_path);
      require_same_size(input, m, "oracle segmenter");
      return m;
    }
    case SegmenterKind::External: {
      if (spec.external_mask.empty()) throw InvalidArgument("external segmenter needs a mask path");
      BinaryMask m = load_mask_png(spec.external_mask);
      require_same_size(input, m, "external segmenter");
      return m;
    }
    case SegmenterKind::Threshold: return threshold_segment(input, spec.rule);
  }
  throw InvalidArgument("unknown segmenter");
}

void InpainterSpec::validate() const {
  if (kind == InpainterKind::CrPatch) {
    cr.validate();
    if (pyramid_levels < 1) throw InvalidArgument("cr-patch: pyramid_levels must be >= 1");
  }
  if (kind == InpainterKind::DiffusionFill) {
    if (diffusion.max_iters < 1) throw InvalidArgument("diffusion-fill: max_iters must be >= 1");
    if (!(diffusion.epsilon > 0.0)) throw InvalidArgument("diffusion-fill: epsilon must be > 0");
  }
}

std::string InpainterSpec::describe() const {
  switch (kind) {
    case InpainterKind::CrPatch:
      return fmt::format("cr-patch(alpha={}, patch={}, stride={}, levels={})", cr.alpha, cr.patch, cr.stride,
                         pyramid_levels);
    case InpainterKind::DiffusionFill:
      return fmt::format("diffusion-fill(max_iters={}, epsilon={})", diffusion.max_iters, diffusion.epsilon);
    case InpainterKind::IdentityDebug: return "identity-debug";
  }
  return "unknown";
}

Raster diffusion_fill(const Raster& hole, const BinaryMask& mask, const DiffusionParams& params) {
  require_same_size(hole, mask, "diffusion-fill");
  const std::size_t holes = mask.count();
  if (holes == 0) return hole;
  if (holes == mask.pixel_count()) throw UninpaintableError("mask covers the whole image");

  const int w = hole.width();
  const int h = hole.height();
  const int ch = hole.channels();
  std::vector<double> v(hole.samples().begin(), hole.samples().end());
  auto at = [&](int x, int y, int c) -> double& {
    return v[(std::size_t(y) * std::size_t(w) + std::size_t(x)) * std::size_t(ch) + std::size_t(c)];
  };

  std::vector<double> mean(std::size_t(ch), 0.0);
  const std::size_t known = mask.pixel_count() - holes;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (!mask.at(x, y))
        for (int c = 0; c < ch; ++c) mean[std::size_t(c)] += at(x, y, c);
  for (double& m : mean) m /= double(known);

  std::vector<std::pair<int, int>> targets;
  targets.reserve(holes);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask.at(x, y)) {
        targets.emplace_back(x, y);
        for (int c = 0; c < ch; ++c) at(x, y, c) = mean[std::size_t(c)];
      }

  for (int it = 0; it < params.max_iters; ++it) {
    double biggest = 0.0;
    for (const auto& [x, y] : targets) {
      for (int c = 0; c < ch; ++c) {
        double sum = 0.0;
        int n = 0;
        if (x > 0) sum += at(x - 1, y, c), ++n;
        if (x + 1 < w) sum += at(x + 1, y, c), ++n;
        if (y > 0) sum += at(x, y - 1, c), ++n;
        if (y + 1 < h) sum += at(x, y + 1, c), ++n;
        const double next = sum / n;
        biggest = std::max(biggest, std::abs(next - at(x, y, c)));
        at(x, y, c) = next;
      }
    }
    if (biggest < params.epsilon) break;
  }

  std::vector<float> out(hole.samples().begin(), hole.samples().end());
  for (const auto& [x, y] : targets)
    for (int c = 0; c < ch; ++c) {
      const std::size_t i = (std::size_t(y) * std::size_t(w) + std::size_t(x)) * std::size_t(ch) + std::size_t(c);
      out[i] = float(v[i]);
    }
  return Raster(w, h, hole.space(), std::move(out));
}

Raster inpaint(const Raster& hole, const BinaryMask& mask, const InpainterSpec& spec, const Raster* gt) {
  spec.validate();
  require_same_size(hole, mask, "inpaint");
  if (mask.pixel_count() > 0 && mask.count() == mask.pixel_count()) {
    throw UninpaintableError("mask covers the whole image");
  }
  switch (spec.kind) {
    case InpainterKind::CrPatch: return cr_inpaint(hole, mask, spec.cr, spec.pyramid_levels);
    case InpainterKind::DiffusionFill: return diffusion_fill(hole, mask, spec.diffusion);
    case InpainterKind::IdentityDebug: {
      if (!gt) throw InvalidArgument("identity-debug inpainter needs the ground truth");
      if (gt->width() != hole.width() || gt->height() != hole.height() || gt->channels() != hole.channels()) {
        throw InvalidArgument("identity-debug: ground truth shape mismatch");
      }
      return *gt;
    }
  }
  throw InvalidArgument("unknown inpainter");
}

}  // namespace scafrest
