#include "scafrest/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "scafrest/error.hpp"
#include "scafrest/kv_config.hpp"
#include "scafrest/manifest.hpp"
#include "scafrest/pipeline.hpp"
#include "scafrest/png_io.hpp"
#include "scafrest/report.hpp"
#include "scafrest/swin_geometry.hpp"

namespace scafrest {
namespace {

namespace fs = std::filesystem;

/// String-valued flags that override keys of a KvConfig.
class Overrides {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option(flag, values_[key], help);
    flags_.emplace_back(app, flag, key);
  }

  void apply(KvConfig& kv) const {
    for (const auto& [app, flag, key] : flags_) {
      if (app->count(flag) > 0) kv.set(key, values_.at(key));
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::tuple<CLI::App*, std::string, std::string>> flags_;
};

KvConfig load_config(const std::string& path, const Overrides& overrides) {
  KvConfig kv = path.empty() ? KvConfig{} : KvConfig::load(path);
  overrides.apply(kv);
  kv.check_known_keys();
  return kv;
}

void print_counts(const DatasetManifest& m, std::ostream& out) {
  const CountTable& t = m.counts;
  out << fmt::format("{:<12} {:>10} {:>10} {:>10} {:>10} {:>10}\n", "Missing rate", "train", "val", "test",
                     "ext_test", "total");
  for (ProportionBucket b : kAllBuckets) {
    out << fmt::format("{:<12} {:>10} {:>10} {:>10} {:>10} {:>10}\n", bucket_label(b), t.at(Split::Train, b),
                       t.at(Split::Val, b), t.at(Split::Test, b), t.at(Split::ExtTest, b), t.bucket_total(b));
  }
  std::size_t deg = 0;
  for (Split s : kAllSplits) deg += t.degenerate(s);
  out << fmt::format("{:<12} {:>10} {:>10} {:>10} {:>10} {:>10}\n", "degenerate", t.degenerate(Split::Train),
                     t.degenerate(Split::Val), t.degenerate(Split::Test), t.degenerate(Split::ExtTest), deg);
  out << fmt::format("{:<12} {:>10} {:>10} {:>10} {:>10} {:>10}\n", "Total", t.split_total(Split::Train),
                     t.split_total(Split::Val), t.split_total(Split::Test), t.split_total(Split::ExtTest),
                     t.total());
  out << fmt::format("records: {}\n", m.records.size());
  out << fmt::format("split totals: train={} val={} test={} ext_test={}\n", t.split_total(Split::Train),
                     t.split_total(Split::Val), t.split_total(Split::Test), t.split_total(Split::ExtTest));
}

Raster side_by_side(const Raster& input, const BinaryMask& mask, const Raster& restored) {
  const int w = input.width();
  const int h = input.height();
  Raster out(3 * w, h, ColorSpace::RGB);
  const Raster in_rgb = input.channels() == 1 ? Raster() : to_rgb(input);
  const Raster re_rgb = restored.channels() == 1 ? Raster() : to_rgb(restored);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.set(x, y, c, in_rgb.empty() ? input.at(x, y, 0) : in_rgb.at(x, y, c));
        out.set(w + x, y, c, mask.at(x, y) ? 1.0f : 0.0f);
        out.set(2 * w + x, y, c, re_rgb.empty() ? restored.at(x, y, 0) : re_rgb.at(x, y, c));
      }
    }
  }
  return out;
}

SegmenterKind parse_segmenter(const std::string& name) {
  if (name == "oracle") return SegmenterKind::Oracle;
  if (name == "external") return SegmenterKind::External;
  if (name == "threshold") return SegmenterKind::Threshold;
  throw InvalidArgument("unknown segmenter '" + name + "'");
}

InpainterKind parse_inpainter(const std::string& name) {
  if (name == "cr-patch") return InpainterKind::CrPatch;
  if (name == "diffusion-fill") return InpainterKind::DiffusionFill;
  if (name == "identity-debug") return InpainterKind::IdentityDebug;
  throw InvalidArgument("unknown inpainter '" + name + "'");
}

void add_inpainter_overrides(CLI::App* app, Overrides& ov) {
  ov.add(app, "--alpha", "cr.alpha", "CR softmax temperature");
  ov.add(app, "--patch", "cr.patch", "CR patch size");
  ov.add(app, "--stride", "cr.stride", "CR patch stride");
  ov.add(app, "--levels", "cr.levels", "CR pyramid levels");
  ov.add(app, "--max-iters", "diffusion.max_iters", "diffusion-fill iteration cap");
  ov.add(app, "--epsilon", "diffusion.epsilon", "diffusion-fill convergence threshold");
}

void add_threshold_overrides(CLI::App* app, Overrides& ov) {
  ov.add(app, "--lum-min", "threshold.lum_min", "threshold segmenter: lowest luminance");
  ov.add(app, "--lum-max", "threshold.lum_max", "threshold segmenter: highest luminance");
  ov.add(app, "--max-saturation", "threshold.max_saturation", "threshold segmenter: saturation cap");
}

std::string render_labels(int h, int w, int window) {
  // Region labels of the shifted-window mask in the rolled frame.
  const int shift = window / 2;
  const int ph = (h + window - 1) / window * window;
  const int pw = (w + window - 1) / window * window;
  auto slice = [&](int v, int n) { return v < n - window ? 0 : (v < n - shift ? 1 : 2); };
  std::string s;
  for (int y = 0; y < ph; ++y) {
    for (int x = 0; x < pw; ++x) {
      s += char('0' + 3 * slice(y, ph) + slice(x, pw));
      if (x + 1 < pw && (x + 1) % window == 0) s += ' ';
    }
    s += '\n';
    if (y + 1 < ph && (y + 1) % window == 0) s += '\n';
  }
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scaffold occlusion synthesis, two-step restoration, and evaluation", "scafrest"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;

  // synth
  auto* synth = app.add_subcommand("synth", "Pair scaffold cutouts with activity images");
  std::string synth_config;
  bool manifest_only = false;
  std::string manifest_out;
  Overrides synth_ov;
  synth->add_option("--config", synth_config, "key = value configuration file");
  synth->add_flag("--manifest-only", manifest_only, "Compute records and counts without writing images");
  synth->add_option("--manifest", manifest_out, "Manifest path (default <out>/manifest.jsonl)");
  synth_ov.add(synth, "--scaffolds", "scaffold_dir", "Directory of RGBA cutout PNGs");
  synth_ov.add(synth, "--activities", "activity_dir", "Directory of activity PNGs");
  synth_ov.add(synth, "--out", "out_dir", "Output dataset directory");
  synth_ov.add(synth, "--width", "target_w", "Target width");
  synth_ov.add(synth, "--height", "target_h", "Target height");
  synth_ov.add(synth, "--alpha-threshold", "alpha_threshold", "Alpha binarization threshold");
  synth_ov.add(synth, "--rotation-lo", "rotation_lo", "Lowest rotation angle in degrees");
  synth_ov.add(synth, "--rotation-hi", "rotation_hi", "Highest rotation angle in degrees");
  synth_ov.add(synth, "--seed", "seed", "Random seed");
  synth_ov.add(synth, "--train", "split_train", "Train fraction");
  synth_ov.add(synth, "--val", "split_val", "Validation fraction");
  synth_ov.add(synth, "--test", "split_test", "Test fraction");
  synth_ov.add(synth, "--hole-fill", "hole_fill", "Sample value written into holes");
  synth_ov.add(synth, "--ext-test", "ext_test", "Assign every record to ext_test (true/false)");
  synth_ov.add(synth, "--threads", "threads", "Worker threads (0 = all cores)");

  // segment
  auto* seg = app.add_subcommand("segment", "Produce a scaffold mask for one image");
  std::string seg_input, seg_out, seg_kind = "threshold", seg_mask, seg_manifest, seg_id, seg_config;
  Overrides seg_ov;
  seg->add_option("--input", seg_input, "Input image (ignored by oracle)");
  seg->add_option("--out", seg_out, "Output mask PNG")->required();
  seg->add_option("--segmenter", seg_kind, "oracle | external | threshold")->capture_default_str();
  seg->add_option("--mask", seg_mask, "Mask file for the external segmenter");
  seg->add_option("--manifest", seg_manifest, "Dataset manifest for the oracle segmenter");
  seg->add_option("--id", seg_id, "Record id for the oracle segmenter");
  seg->add_option("--config", seg_config, "key = value configuration file");
  seg->add_option("--seed", seed, "Random seed (echoed)");
  add_threshold_overrides(seg, seg_ov);

  // inpaint
  auto* inp = app.add_subcommand("inpaint", "Restore the masked pixels of one image");
  std::string inp_input, inp_mask, inp_out, inp_composite, inp_kind = "cr-patch", inp_config;
  Overrides inp_ov;
  inp->add_option("--input", inp_input, "Image to restore")->required();
  inp->add_option("--mask", inp_mask, "Mask PNG; nonzero pixels are restored")->required();
  inp->add_option("--out", inp_out, "Restored image PNG")->required();
  inp->add_option("--composite", inp_composite, "Side-by-side input | mask | restored PNG");
  inp->add_option("--inpainter", inp_kind, "cr-patch | diffusion-fill")->capture_default_str();
  inp->add_option("--config", inp_config, "key = value configuration file");
  inp->add_option("--seed", seed, "Random seed (echoed)");
  add_inpainter_overrides(inp, inp_ov);

  // eval
  auto* ev = app.add_subcommand("eval", "Segment, inpaint, and score a rendered dataset");
  std::string ev_dataset, ev_manifest, ev_out, ev_seg = "oracle", ev_inp = "cr-patch", ev_split, ev_name, ev_config;
  int ev_threads = 0;
  int ev_side = 8;
  Overrides ev_ov;
  ev->add_option("--dataset", ev_dataset, "Rendered dataset directory")->required();
  ev->add_option("--manifest", ev_manifest, "Manifest path (default <dataset>/manifest.jsonl)");
  ev->add_option("--out", ev_out, "Report CSV path");
  ev->add_option("--segmenter", ev_seg, "oracle | threshold")->capture_default_str();
  ev->add_option("--inpainter", ev_inp, "cr-patch | diffusion-fill | identity-debug")->capture_default_str();
  ev->add_option("--split", ev_split, "train | val | test | ext_test (default: all records)");
  ev->add_option("--name", ev_name, "Dataset name for the report (default: directory name)");
  ev->add_option("--threads", ev_threads, "Worker threads (0 = all cores)");
  ev->add_option("--embedding-side", ev_side, "Side of the pixel embedding grid")->capture_default_str();
  ev->add_option("--config", ev_config, "key = value configuration file");
  ev->add_option("--seed", seed, "Random seed (echoed)");
  add_inpainter_overrides(ev, ev_ov);
  add_threshold_overrides(ev, ev_ov);

  // report
  auto* rep = app.add_subcommand("report", "Re-render a report CSV");
  std::string rep_in, rep_format = "table";
  rep->add_option("--in", rep_in, "Report CSV")->required();
  rep->add_option("--format", rep_format, "table | csv")
      ->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();

  // inspect-swin
  auto* sw = app.add_subcommand("inspect-swin", "Print backbone shapes and shifted-window masks");
  int sw_h = 512, sw_w = 512, sw_c = 128, sw_window = 7, sw_patch = 4, sw_fused = 512;
  int sw_mask_h = 0, sw_mask_w = 0;
  sw->add_option("--height", sw_h, "Input height")->capture_default_str();
  sw->add_option("--width", sw_w, "Input width")->capture_default_str();
  sw->add_option("--channels", sw_c, "Stage-1 channel width")->capture_default_str();
  sw->add_option("--window", sw_window, "Attention window")->capture_default_str();
  sw->add_option("--patch-embed", sw_patch, "Patch embedding stride")->capture_default_str();
  sw->add_option("--fused-dim", sw_fused, "Fused pyramid channel width")->capture_default_str();
  sw->add_option("--mask-height", sw_mask_h, "Dump shifted-window masks for a token grid of this height");
  sw->add_option("--mask-width", sw_mask_w, "Token grid width for the mask dump");
  sw->add_option("--seed", seed, "Random seed (echoed)");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitUsage;
  }

  if (*synth) {
    KvConfig kv = load_config(synth_config, synth_ov);
    SynthesisConfig cfg;
    apply_synthesis(kv, cfg);
    cfg.validate();
    if (cfg.scaffold_dir.empty() || cfg.activity_dir.empty()) {
      throw InvalidArgument("synth needs scaffold_dir and activity_dir (--scaffolds, --activities)");
    }
    const DatasetManifest m = synthesize_dataset(cfg, manifest_only);
    fs::path mpath = manifest_out;
    if (mpath.empty() && !cfg.out_dir.empty()) mpath = cfg.out_dir / "manifest.jsonl";
    if (!mpath.empty()) {
      if (mpath.has_parent_path()) fs::create_directories(mpath.parent_path());
      write_manifest(m, mpath);
    }
    print_counts(m, out);
    out << fmt::format("seed: {}\n", cfg.seed);
    if (!mpath.empty()) out << fmt::format("manifest: {}\n", mpath.string());
    return kExitOk;
  }

  if (*seg) {
    KvConfig kv = load_config(seg_config, seg_ov);
    SegmenterSpec spec;
    spec.kind = parse_segmenter(seg_kind);
    apply_threshold(kv, spec.rule);
    spec.external_mask = seg_mask;
    BinaryMask mask;
    if (spec.kind == SegmenterKind::Oracle) {
      if (seg_manifest.empty() || seg_id.empty()) throw InvalidArgument("oracle segmenter needs --manifest and --id");
      const DatasetManifest m = read_manifest(fs::path(seg_manifest));
      const auto it = std::find_if(m.records.begin(), m.records.end(),
                                   [&](const SampleRecord& r) { return r.id == seg_id; });
      if (it == m.records.end()) throw InvalidArgument("no record '" + seg_id + "' in manifest");
      const fs::path dir = fs::path(seg_manifest).parent_path();
      if (!it->overlay_path) throw InvalidArgument("record '" + seg_id + "' has no rendered images");
      const Raster input = load_png(dir / *it->overlay_path);
      mask = segment(input, spec, SegmentContext{&*it, dir});
    } else {
      if (seg_input.empty()) throw InvalidArgument("--input is required for this segmenter");
      mask = segment(load_png(seg_input), spec);
    }
    save_png(mask, seg_out);
    out << fmt::format("segmenter: {}\ncoverage: {}\nseed: {}\n", spec.describe(), format_metric(mask.coverage()),
                       seed);
    return kExitOk;
  }

  if (*inp) {
    KvConfig kv = load_config(inp_config, inp_ov);
    InpainterSpec spec;
    apply_inpainter(kv, spec);
    spec.kind = parse_inpainter(inp_kind);
    if (spec.kind == InpainterKind::IdentityDebug) {
      throw InvalidArgument("identity-debug needs ground truth and is only available in eval");
    }
    const Raster input = load_png(inp_input);
    const BinaryMask mask = load_mask_png(inp_mask);
    const Raster restored = inpaint(input, mask, spec);
    save_png(restored, inp_out);
    if (!inp_composite.empty()) save_png(side_by_side(input, mask, restored), inp_composite);
    out << fmt::format("inpainter: {}\ncoverage: {}\nseed: {}\n", spec.describe(), format_metric(mask.coverage()),
                       seed);
    return kExitOk;
  }

  if (*ev) {
    KvConfig kv = load_config(ev_config, ev_ov);
    SegmenterSpec sspec;
    sspec.kind = parse_segmenter(ev_seg);
    if (sspec.kind == SegmenterKind::External) throw InvalidArgument("eval supports oracle and threshold segmenters");
    apply_threshold(kv, sspec.rule);
    InpainterSpec ispec;
    apply_inpainter(kv, ispec);
    ispec.kind = parse_inpainter(ev_inp);

    const fs::path dataset = ev_dataset;
    const fs::path mpath = ev_manifest.empty() ? dataset / "manifest.jsonl" : fs::path(ev_manifest);
    const DatasetManifest m = read_manifest(mpath);
    EvalOptions opts;
    opts.dataset_name = ev_name.empty() ? fs::absolute(dataset).lexically_normal().filename().string() : ev_name;
    if (opts.dataset_name.empty()) opts.dataset_name = fs::absolute(dataset).parent_path().filename().string();
    if (!ev_split.empty()) {
      opts.split = parse_split(ev_split);
      if (!opts.split) throw InvalidArgument("unknown split '" + ev_split + "'");
    }
    opts.embedding_side = ev_side;
    opts.seed = seed;
    opts.threads = ev_threads;
    const RunReport report = evaluate_run(m, dataset, sspec, ispec, opts);
    if (!ev_out.empty()) write_report_csv(report, fs::path(ev_out));
    print_report_table(report, out);
    return report.rows.empty() && report.failures > 0 ? kExitFailure : kExitOk;
  }

  if (*rep) {
    const RunReport report = read_report_csv(fs::path(rep_in));
    if (rep_format == "csv") {
      write_report_csv(report, out);
    } else {
      print_report_table(report, out);
    }
    return kExitOk;
  }

  if (*sw) {
    BackboneConfig cfg;
    cfg.base_dim = sw_c;
    cfg.window = sw_window;
    cfg.patch_embed = sw_patch;
    cfg.validate();
    const StageShapes shapes = pyramid_shapes(backbone_shapes(sw_h, sw_w, cfg), sw_fused);
    const auto schedule = block_schedule(cfg);
    out << fmt::format("input {}x{}, C={}, window {}, patch embed {}, seed {}\n", sw_h, sw_w, sw_c, sw_window,
                       sw_patch, seed);
    auto shape = [](const TensorShape& s) {
      return fmt::format("{}x{}x{}{}", s.height, s.width, s.channels, s.degenerate() ? " (degenerate)" : "");
    };
    for (std::size_t i = 0; i < shapes.stages.size(); ++i) {
      std::string kinds;
      for (bool shifted : schedule[i]) kinds += shifted ? 'S' : 'W';
      out << fmt::format("stage {}: {}  blocks {}\n", i + 1, shape(shapes.stages[i]), kinds);
    }
    for (std::size_t i = 0; i < shapes.pyramid.size(); ++i) {
      out << fmt::format("lateral P{}: {}\n", i + 1, shape(shapes.pyramid[i]));
    }
    for (std::size_t i = 0; i < shapes.ppm.size(); ++i) out << fmt::format("ppm {}: {}\n", i, shape(shapes.ppm[i]));
    out << fmt::format("fused: {}\n", shape(shapes.fused));

    if (sw_mask_h > 0 || sw_mask_w > 0) {
      const int mh = sw_mask_h > 0 ? sw_mask_h : sw_mask_w;
      const int mw = sw_mask_w > 0 ? sw_mask_w : sw_mask_h;
      const auto masks = shifted_attention_mask(mh, mw, sw_window);
      out << fmt::format("\nshifted-window region labels, {}x{} tokens, window {}, shift {}:\n", mh, mw, sw_window,
                         sw_window / 2);
      out << render_labels(mh, mw, sw_window);
      out << "\nblocked pairs per window:";
      for (const auto& m : masks) out << ' ' << m.blocked_count();
      out << '\n';
    }
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run(args, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace scafrest
