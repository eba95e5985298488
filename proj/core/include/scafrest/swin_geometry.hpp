#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

#include "scafrest/feature_map.hpp"

namespace scafrest {

/// Hierarchical backbone configuration; the defaults are the [2, 2, 18, 2],
/// C = 128, window 7 setup used for 512 x 512 inputs.
struct BackboneConfig {
  std::array<int, 4> blocks_per_stage = {2, 2, 18, 2};
  int base_dim = 128;
  int window = 7;
  int patch_embed = 4;

  void validate() const;
};

struct WindowOrigin {
  int y = 0;
  int x = 0;
  friend bool operator==(const WindowOrigin&, const WindowOrigin&) = default;
};

/// Geometry of a window partition. Windows are cut from the padded map after
/// rolling it by (-shift_y, -shift_x), i.e. the content moves toward the
/// top-left as in shifted-window attention.
struct WindowLayout {
  int height = 0;
  int width = 0;
  int window_h = 0;
  int window_w = 0;
  int padded_h = 0;
  int padded_w = 0;
  int shift_y = 0;
  int shift_x = 0;
  std::vector<WindowOrigin> windows;
  /// padded_h x padded_w flags in the rolled frame; 1 marks a padding token.
  std::vector<std::uint8_t> pad_mask;

  int tokens_per_window() const { return window_h * window_w; }
  /// Unrolled, padded-frame coordinates of the token at rolled position (y, x).
  std::pair<int, int> source_of(int y, int x) const;
  bool is_padding(int y, int x) const { return pad_mask[std::size_t(y) * std::size_t(padded_w) + std::size_t(x)] != 0; }
};

struct PartitionedWindows {
  WindowLayout layout;
  /// One matrix per window: rows are tokens in row-major order, columns are channels.
  std::vector<Eigen::MatrixXd> windows;
};

/// Zero-pads to multiples of the window, rolls by the shift, and enumerates
/// windows row-major.
PartitionedWindows window_partition(const FeatureMap& tokens, int window, int shift = 0);
PartitionedWindows window_partition(const FeatureMap& tokens, int window_h, int window_w, int shift_y,
                                    int shift_x);

/// Exact inverse of window_partition; padding is discarded.
FeatureMap window_merge(const WindowLayout& layout, const std::vector<Eigen::MatrixXd>& windows);

/// Toroidal roll: out(y, x) = in((y - dy) mod H, (x - dx) mod W).
FeatureMap cyclic_shift(const FeatureMap& tokens, int dy, int dx);

/// Per-window additive mask: a blocked pair contributes -infinity.
struct AttentionMask {
  int tokens = 0;
  std::vector<std::uint8_t> blocked;

  bool is_blocked(int a, int b) const { return blocked[std::size_t(a) * std::size_t(tokens) + std::size_t(b)] != 0; }
  double additive(int a, int b) const;
  bool all_open() const;
  std::size_t blocked_count() const;
};

/// Masks for every window of a layout with the given geometry. Tokens are
/// labelled by the 3 x 3 slicing at (-window, -shift) of the rolled padded
/// map; a pair is blocked if labels differ or either token is padding.
std::vector<AttentionMask> window_attention_masks(int height, int width, int window_h, int window_w,
                                                  int shift_y, int shift_x);

/// Shifted-window masks with shift floor(w / 2) on both axes. Requires H, W >= w.
std::vector<AttentionMask> shifted_attention_mask(int height, int width, int window);

/// Plain window masks (no shift); all-open unless padding is present.
std::vector<AttentionMask> unshifted_attention_mask(int height, int width, int window);

/// Single-head projection parameters: Q = X Wq, K = X Wk, V = X Wv.
struct AttentionParams {
  Eigen::MatrixXd wq;
  Eigen::MatrixXd wk;
  Eigen::MatrixXd wv;
  double scale = 1.0;

  static AttentionParams identity(int channels);
};

/// Row-stochastic attention matrix softmax(scale Q K^T + mask). Blocked pairs
/// get exactly zero weight; a fully blocked row is all zeros.
Eigen::MatrixXd attention_weights(const Eigen::MatrixXd& window, const AttentionMask* mask,
                                  const AttentionParams& params);

/// Applies attention to every window. `masks` is either empty or one per window.
std::vector<Eigen::MatrixXd> windowed_attention(const std::vector<Eigen::MatrixXd>& windows,
                                                const std::vector<AttentionMask>& masks,
                                                const AttentionParams& params);

struct TensorShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  bool degenerate() const { return height < 1 || width < 1; }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

struct StageShapes {
  std::array<TensorShape, 4> stages{};
  /// Lateral outputs P1..P4 (empty until pyramid_shapes runs).
  std::vector<TensorShape> pyramid;
  /// Pooled maps produced by the pyramid pooling module on the last stage.
  std::vector<TensorShape> ppm;
  TensorShape fused{};
};

/// S_i = (H / (p * 2^(i-1)), W / (p * 2^(i-1)), C * 2^(i-1)) with floor division.
/// Stages that round to zero tokens are kept and report degenerate().
StageShapes backbone_shapes(int input_h, int input_w, const BackboneConfig& cfg);

/// Adds pyramid, pooling, and fused-map shapes for a fused channel width.
StageShapes pyramid_shapes(const StageShapes& stages, int fused_dim, const std::vector<int>& ppm_scales = {1, 2, 3, 6});

/// Attention kind per block: false for plain windows, true for shifted windows.
std::vector<std::vector<bool>> block_schedule(const BackboneConfig& cfg);

/// Adaptive average pooling with floor/ceil bin edges.
FeatureMap adaptive_avg_pool(const FeatureMap& fm, int out_h, int out_w);

struct FusedPyramid {
  std::vector<FeatureMap> levels;
  std::vector<FeatureMap> pooled;
  FeatureMap fused;
};

/// Parameter-free fusion path for smoke tests: laterals copy the first
/// `fused_dim` channels (zero-padding narrower stages), the top level adds the
/// upsampled pooled maps, levels are merged top-down by bilinear upsampling
/// and addition, and the fused map is the per-pixel mean of all levels at
/// the finest resolution.
FusedPyramid fuse_pyramid(const std::vector<FeatureMap>& stages, int fused_dim,
                          const std::vector<int>& ppm_scales = {1, 2, 3, 6});

}  // namespace scafrest
