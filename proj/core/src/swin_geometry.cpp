#include "scafrest/swin_geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "scafrest/error.hpp"

namespace scafrest {
namespace {

int positive_mod(int v, int m) {
  const int r = v % m;
  return r < 0 ? r + m : r;
}

int round_up(int v, int m) { return (v + m - 1) / m * m; }

WindowLayout make_layout(int height, int width, int wh, int ww, int sy, int sx) {
  if (height < 1 || width < 1) throw InvalidArgument("window partition: token map must be non-empty");
  if (wh < 1 || ww < 1) throw InvalidArgument("window partition: window side must be >= 1");
  if (sy < 0 || sx < 0 || sy >= wh || sx >= ww) {
    throw InvalidArgument("window partition: shift must lie in [0, window)");
  }
  WindowLayout l;
  l.height = height;
  l.width = width;
  l.window_h = wh;
  l.window_w = ww;
  l.padded_h = round_up(height, wh);
  l.padded_w = round_up(width, ww);
  l.shift_y = sy;
  l.shift_x = sx;
  for (int y = 0; y < l.padded_h; y += wh)
    for (int x = 0; x < l.padded_w; x += ww) l.windows.push_back({y, x});
  l.pad_mask.resize(std::size_t(l.padded_h) * std::size_t(l.padded_w));
  for (int y = 0; y < l.padded_h; ++y) {
    for (int x = 0; x < l.padded_w; ++x) {
      const auto [oy, ox] = l.source_of(y, x);
      l.pad_mask[std::size_t(y) * std::size_t(l.padded_w) + std::size_t(x)] = (oy >= height || ox >= width) ? 1 : 0;
    }
  }
  return l;
}

// Region label along one axis of the rolled map: the 3-way slicing
// [0, n - w), [n - w, n - s), [n - s, n) when shifted, a single region otherwise.
int axis_label(int pos, int extent, int window, int shift) {
  if (shift == 0) return 0;
  if (pos < extent - window) return 0;
  if (pos < extent - shift) return 1;
  return 2;
}

FeatureMap lateral(const FeatureMap& s, int fused_dim) {
  FeatureMap out(s.height(), s.width(), fused_dim);
  const int keep = std::min(fused_dim, s.channels());
  for (int y = 0; y < s.height(); ++y)
    for (int x = 0; x < s.width(); ++x)
      for (int c = 0; c < keep; ++c) out.at(y, x, c) = s.at(y, x, c);
  return out;
}

void accumulate(FeatureMap& acc, const FeatureMap& add) {
  auto a = acc.data();
  const auto b = add.data();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

void scale(FeatureMap& fm, double f) {
  for (double& v : fm.data()) v *= f;
}

}  // namespace

void BackboneConfig::validate() const {
  for (int n : blocks_per_stage)
    if (n < 1) throw InvalidArgument("backbone: block counts must be positive");
  if (base_dim < 1 || window < 1 || patch_embed < 1) {
    throw InvalidArgument("backbone: dimension, window, and patch embed must be positive");
  }
}

std::pair<int, int> WindowLayout::source_of(int y, int x) const {
  return {positive_mod(y + shift_y, padded_h), positive_mod(x + shift_x, padded_w)};
}

FeatureMap cyclic_shift(const FeatureMap& tokens, int dy, int dx) {
  const int h = tokens.height();
  const int w = tokens.width();
  if (h == 0 || w == 0) return tokens;
  FeatureMap out(h, w, tokens.channels());
  for (int y = 0; y < h; ++y) {
    const int sy = positive_mod(y - dy, h);
    for (int x = 0; x < w; ++x) {
      const int sx = positive_mod(x - dx, w);
      for (int c = 0; c < tokens.channels(); ++c) out.at(y, x, c) = tokens.at(sy, sx, c);
    }
  }
  return out;
}

PartitionedWindows window_partition(const FeatureMap& tokens, int window, int shift) {
  return window_partition(tokens, window, window, shift, shift);
}

PartitionedWindows window_partition(const FeatureMap& tokens, int window_h, int window_w, int shift_y,
                                    int shift_x) {
  PartitionedWindows out;
  out.layout = make_layout(tokens.height(), tokens.width(), window_h, window_w, shift_y, shift_x);
  const WindowLayout& l = out.layout;
  const int ch = tokens.channels();
  out.windows.reserve(l.windows.size());
  for (const WindowOrigin& o : l.windows) {
    Eigen::MatrixXd win = Eigen::MatrixXd::Zero(l.tokens_per_window(), ch);
    int t = 0;
    for (int dy = 0; dy < window_h; ++dy) {
      for (int dx = 0; dx < window_w; ++dx, ++t) {
        const auto [sy, sx] = l.source_of(o.y + dy, o.x + dx);
        if (sy >= l.height || sx >= l.width) continue;
        for (int c = 0; c < ch; ++c) win(t, c) = tokens.at(sy, sx, c);
      }
    }
    out.windows.push_back(std::move(win));
  }
  return out;
}

FeatureMap window_merge(const WindowLayout& l, const std::vector<Eigen::MatrixXd>& windows) {
  if (windows.size() != l.windows.size()) throw InvalidArgument("window_merge: window count does not match layout");
  if (windows.empty()) throw InvalidArgument("window_merge: no windows");
  const auto ch = windows.front().cols();
  for (const auto& w : windows) {
    if (w.rows() != l.tokens_per_window() || w.cols() != ch) {
      throw InvalidArgument("window_merge: window shape does not match layout");
    }
  }
  FeatureMap out(l.height, l.width, int(ch));
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const WindowOrigin o = l.windows[k];
    int t = 0;
    for (int dy = 0; dy < l.window_h; ++dy) {
      for (int dx = 0; dx < l.window_w; ++dx, ++t) {
        const auto [sy, sx] = l.source_of(o.y + dy, o.x + dx);
        if (sy >= l.height || sx >= l.width) continue;
        for (Eigen::Index c = 0; c < ch; ++c) out.at(sy, sx, int(c)) = windows[k](t, c);
      }
    }
  }
  return out;
}

double AttentionMask::additive(int a, int b) const {
  return is_blocked(a, b) ? -std::numeric_limits<double>::infinity() : 0.0;
}

bool AttentionMask::all_open() const { return blocked_count() == 0; }

std::size_t AttentionMask::blocked_count() const {
  std::size_t n = 0;
  for (auto b : blocked) n += b;
  return n;
}

std::vector<AttentionMask> window_attention_masks(int height, int width, int window_h, int window_w,
                                                  int shift_y, int shift_x) {
  const WindowLayout l = make_layout(height, width, window_h, window_w, shift_y, shift_x);
  const int t = l.tokens_per_window();
  std::vector<AttentionMask> masks;
  masks.reserve(l.windows.size());
  std::vector<int> label(static_cast<std::size_t>(t));
  std::vector<std::uint8_t> pad(static_cast<std::size_t>(t));
  for (const WindowOrigin& o : l.windows) {
    int k = 0;
    for (int dy = 0; dy < window_h; ++dy) {
      for (int dx = 0; dx < window_w; ++dx, ++k) {
        const int y = o.y + dy;
        const int x = o.x + dx;
        label[std::size_t(k)] = 3 * axis_label(y, l.padded_h, window_h, shift_y) +
                                axis_label(x, l.padded_w, window_w, shift_x);
        pad[std::size_t(k)] = l.is_padding(y, x) ? 1 : 0;
      }
    }
    AttentionMask m;
    m.tokens = t;
    m.blocked.resize(std::size_t(t) * std::size_t(t));
    for (int a = 0; a < t; ++a) {
      for (int b = 0; b < t; ++b) {
        const bool blocked = label[std::size_t(a)] != label[std::size_t(b)] || pad[std::size_t(a)] || pad[std::size_t(b)];
        m.blocked[std::size_t(a) * std::size_t(t) + std::size_t(b)] = blocked ? 1 : 0;
      }
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

std::vector<AttentionMask> shifted_attention_mask(int height, int width, int window) {
  if (window < 1) throw InvalidArgument("window side must be >= 1");
  if (height < window || width < window) throw InvalidArgument("window larger than map");
  return window_attention_masks(height, width, window, window, window / 2, window / 2);
}

std::vector<AttentionMask> unshifted_attention_mask(int height, int width, int window) {
  return window_attention_masks(height, width, window, window, 0, 0);
}

AttentionParams AttentionParams::identity(int channels) {
  AttentionParams p;
  p.wq = Eigen::MatrixXd::Identity(channels, channels);
  p.wk = Eigen::MatrixXd::Identity(channels, channels);
  p.wv = Eigen::MatrixXd::Identity(channels, channels);
  p.scale = 1.0 / std::sqrt(double(channels));
  return p;
}

Eigen::MatrixXd attention_weights(const Eigen::MatrixXd& window, const AttentionMask* mask,
                                  const AttentionParams& params) {
  if (params.wq.rows() != window.cols() || params.wk.rows() != window.cols() || params.wv.rows() != window.cols()) {
    throw InvalidArgument("attention: projection rows do not match the channel count");
  }
  if (params.wq.cols() != params.wk.cols()) throw InvalidArgument("attention: query and key widths differ");
  const auto t = window.rows();
  if (mask && mask->tokens != t) throw InvalidArgument("attention: mask size does not match the window");

  const Eigen::MatrixXd q = window * params.wq;
  const Eigen::MatrixXd k = window * params.wk;
  const Eigen::MatrixXd logits = params.scale * (q * k.transpose());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(t, t);
  for (Eigen::Index a = 0; a < t; ++a) {
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index b = 0; b < t; ++b) {
      if (mask && mask->is_blocked(int(a), int(b))) continue;
      top = std::max(top, logits(a, b));
    }
    if (top == -std::numeric_limits<double>::infinity()) continue;
    double sum = 0.0;
    for (Eigen::Index b = 0; b < t; ++b) {
      if (mask && mask->is_blocked(int(a), int(b))) continue;
      w(a, b) = std::exp(logits(a, b) - top);
      sum += w(a, b);
    }
    w.row(a) /= sum;
  }
  return w;
}

std::vector<Eigen::MatrixXd> windowed_attention(const std::vector<Eigen::MatrixXd>& windows,
                                                const std::vector<AttentionMask>& masks,
                                                const AttentionParams& params) {
  if (!masks.empty() && masks.size() != windows.size()) {
    throw InvalidArgument("attention: expected one mask per window");
  }
  std::vector<Eigen::MatrixXd> out;
  out.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Eigen::MatrixXd w = attention_weights(windows[i], masks.empty() ? nullptr : &masks[i], params);
    out.push_back(w * (windows[i] * params.wv));
  }
  return out;
}

StageShapes backbone_shapes(int input_h, int input_w, const BackboneConfig& cfg) {
  cfg.validate();
  if (input_h < 1 || input_w < 1) throw InvalidArgument("backbone: input must be non-empty");
  if (input_h % cfg.patch_embed != 0 || input_w % cfg.patch_embed != 0) {
    throw InvalidArgument("backbone: input " + std::to_string(input_h) + "x" + std::to_string(input_w) +
                          " is not divisible by the patch embedding factor " + std::to_string(cfg.patch_embed));
  }
  StageShapes s;
  for (int i = 0; i < 4; ++i) {
    const int factor = cfg.patch_embed << i;
    s.stages[std::size_t(i)] = {input_h / factor, input_w / factor, cfg.base_dim << i};
  }
  return s;
}

StageShapes pyramid_shapes(const StageShapes& stages, int fused_dim, const std::vector<int>& ppm_scales) {
  if (fused_dim < 1) throw InvalidArgument("pyramid: fused dimension must be >= 1");
  StageShapes out = stages;
  out.pyramid.clear();
  out.ppm.clear();
  for (const auto& s : stages.stages) out.pyramid.push_back({s.height, s.width, fused_dim});
  for (int k : ppm_scales) {
    if (k < 1) throw InvalidArgument("pyramid: pooling scales must be >= 1");
    out.ppm.push_back({k, k, fused_dim});
  }
  out.fused = {stages.stages[0].height, stages.stages[0].width, fused_dim};
  return out;
}

std::vector<std::vector<bool>> block_schedule(const BackboneConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<bool>> out;
  for (int n : cfg.blocks_per_stage) {
    std::vector<bool> stage(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) stage[std::size_t(b)] = (b % 2) == 1;
    out.push_back(std::move(stage));
  }
  return out;
}

FeatureMap adaptive_avg_pool(const FeatureMap& fm, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw InvalidArgument("adaptive_avg_pool: output must be non-empty");
  if (fm.height() < 1 || fm.width() < 1) throw InvalidArgument("adaptive_avg_pool: input must be non-empty");
  FeatureMap out(out_h, out_w, fm.channels());
  for (int oy = 0; oy < out_h; ++oy) {
    const int y0 = oy * fm.height() / out_h;
    const int y1 = ((oy + 1) * fm.height() + out_h - 1) / out_h;
    for (int ox = 0; ox < out_w; ++ox) {
      const int x0 = ox * fm.width() / out_w;
      const int x1 = ((ox + 1) * fm.width() + out_w - 1) / out_w;
      const double n = double((y1 - y0) * (x1 - x0));
      for (int c = 0; c < fm.channels(); ++c) {
        double acc = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) acc += fm.at(y, x, c);
        out.at(oy, ox, c) = acc / n;
      }
    }
  }
  return out;
}

FusedPyramid fuse_pyramid(const std::vector<FeatureMap>& stages, int fused_dim, const std::vector<int>& ppm_scales) {
  if (stages.empty()) throw InvalidArgument("fuse_pyramid: no stages");
  if (fused_dim < 1) throw InvalidArgument("fuse_pyramid: fused dimension must be >= 1");
  for (const auto& s : stages) {
    if (s.height() < 1 || s.width() < 1) throw InvalidArgument("fuse_pyramid: degenerate stage");
  }
  FusedPyramid out;
  const FeatureMap& last = stages.back();
  FeatureMap top = lateral(last, fused_dim);
  FeatureMap ppm = top;
  for (int k : ppm_scales) {
    if (k < 1) throw InvalidArgument("fuse_pyramid: pooling scales must be >= 1");
    out.pooled.push_back(adaptive_avg_pool(top, k, k));
    accumulate(ppm, resize_bilinear(out.pooled.back(), last.height(), last.width()));
  }
  scale(ppm, 1.0 / double(ppm_scales.size() + 1));

  out.levels.resize(stages.size());
  out.levels.back() = std::move(ppm);
  for (std::size_t i = stages.size() - 1; i-- > 0;) {
    FeatureMap level = lateral(stages[i], fused_dim);
    accumulate(level, resize_bilinear(out.levels[i + 1], stages[i].height(), stages[i].width()));
    out.levels[i] = std::move(level);
  }

  const int h = stages.front().height();
  const int w = stages.front().width();
  out.fused = FeatureMap(h, w, fused_dim);
  for (const auto& level : out.levels) accumulate(out.fused, resize_bilinear(level, h, w));
  scale(out.fused, 1.0 / double(out.levels.size()));
  return out;
}

}  // namespace scafrest
