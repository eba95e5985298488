#include <array>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "scafrest/error.hpp"
#include "scafrest/manifest.hpp"
#include "scafrest/metrics.hpp"
#include "scafrest/parallel.hpp"
#include "scafrest/pipeline.hpp"
#include "scafrest/png_io.hpp"

namespace scafrest {
namespace {

struct SampleScore {
  bool ok = false;
  double miou = 0.0;
  double mae = 0.0;
  double ssim = 0.0;
  double psnr = 0.0;
  Eigen::VectorXd restored_embedding;
  Eigen::VectorXd gt_embedding;
};

struct Accumulator {
  std::size_t n = 0;
  double miou = 0.0;
  double mae = 0.0;
  double ssim = 0.0;
  double psnr = 0.0;
  std::vector<Eigen::VectorXd> restored;
  std::vector<Eigen::VectorXd> gt;

  void add(const SampleScore& s) {
    ++n;
    miou += s.miou;
    mae += s.mae;
    ssim += s.ssim;
    psnr += s.psnr;
    restored.push_back(s.restored_embedding);
    gt.push_back(s.gt_embedding);
  }

  ReportRow row(std::string label) const {
    ReportRow r;
    r.bucket = std::move(label);
    r.n = n;
    const double k = double(n);
    r.miou = miou / k;
    r.mae = mae / k;
    r.ssim = ssim / k;
    r.psnr = std::isinf(psnr) ? std::numeric_limits<double>::infinity() : psnr / k;
    if (n >= 2) r.frechet = frechet_distance(fit_gaussian(restored), fit_gaussian(gt));
    return r;
  }
};

SampleScore score_sample(const SampleRecord& rec, const std::filesystem::path& dir, const SegmenterSpec& seg,
                         const InpainterSpec& inp, int embedding_side) {
  if (!rec.rendered()) throw IoError("record " + rec.id + " has no rendered images");
  const Raster overlay = load_png(dir / *rec.overlay_path);
  const Raster hole = load_png(dir / *rec.hole_path);
  const Raster gt = load_png(dir / *rec.gt_path);
  const BinaryMask gt_mask = load_mask_png(dir / *rec.mask_path);

  const BinaryMask predicted = segment(overlay, seg, SegmentContext{&rec, dir});
  const Raster restored = inpaint(hole, predicted, inp, &gt);

  SampleScore s;
  s.miou = miou(predicted, gt_mask);
  s.mae = mae(restored, gt);
  s.ssim = ssim(restored, gt);
  s.psnr = psnr(restored, gt);
  s.restored_embedding = pixel_embedding(restored, embedding_side);
  s.gt_embedding = pixel_embedding(gt, embedding_side);
  s.ok = true;
  return s;
}

}  // namespace

RunReport evaluate_run(const DatasetManifest& manifest, const std::filesystem::path& dataset_dir,
                       const SegmenterSpec& seg, const InpainterSpec& inp, const EvalOptions& opts) {
  inp.validate();
  if (opts.embedding_side < 1) throw InvalidArgument("embedding_side must be >= 1");

  std::vector<std::size_t> selected;
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& rec = manifest.records[i];
    if (opts.split && rec.split != *opts.split) continue;
    if (rec.degenerate()) {
      ++degenerate;
      continue;
    }
    selected.push_back(i);
  }

  std::vector<SampleScore> scores(selected.size());
  std::vector<std::string> errors(selected.size());
  parallel_for(selected.size(), opts.threads, [&](std::size_t k) {
    try {
      scores[k] = score_sample(manifest.records[selected[k]], dataset_dir, seg, inp, opts.embedding_side);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  });

  std::array<Accumulator, kBucketCount> buckets;
  Accumulator total;
  std::size_t failures = 0;
  std::string first_failure;
  for (std::size_t k = 0; k < selected.size(); ++k) {
    if (!scores[k].ok) {
      if (failures++ == 0) first_failure = manifest.records[selected[k]].id + ": " + errors[k];
      continue;
    }
    buckets[std::size_t(*manifest.records[selected[k]].bucket)].add(scores[k]);
    total.add(scores[k]);
  }

  RunReport report;
  report.dataset = opts.dataset_name;
  report.degenerate = degenerate;
  report.failures = failures;
  for (ProportionBucket b : kAllBuckets) {
    const auto& acc = buckets[std::size_t(b)];
    if (acc.n > 0) report.rows.push_back(acc.row(std::string(bucket_label(b))));
  }
  if (total.n > 0) report.rows.push_back(total.row(kTotalRow));

  auto& p = report.provenance;
  p.emplace_back("dataset", opts.dataset_name);
  p.emplace_back("split", opts.split ? std::string(split_name(*opts.split)) : "all");
  p.emplace_back("seed", std::to_string(opts.seed));
  p.emplace_back("manifest_sha256", manifest_digest(manifest));
  p.emplace_back("segmenter", seg.describe());
  p.emplace_back("inpainter", inp.describe());
  p.emplace_back("embedding", fmt::format("pixel-gray-{}x{}", opts.embedding_side, opts.embedding_side));
  p.emplace_back("aggregation", "per-image mean for mae/ssim/psnr; frechet fitted per row");
  p.emplace_back("miou_total", total.n > 0 ? format_metric(total.miou / double(total.n)) : "nan");
  p.emplace_back("evaluated", std::to_string(total.n));
  p.emplace_back("degenerate", std::to_string(degenerate));
  p.emplace_back("failures", std::to_string(failures));
  if (failures > 0) {
    for (char& c : first_failure)
      if (c == '\n' || c == '\r') c = ' ';
    p.emplace_back("first_failure", first_failure);
  }
  return report;
}

}  // namespace scafrest
