#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "scafrest/feature_map.hpp"
#include "scafrest/raster.hpp"

namespace scafrest {

/// Maps a flattened p*p*C patch to the vector used for cosine similarity.
using PatchEncoder = std::function<std::vector<double>(std::span<const double>)>;

/// Per-patch loss between a reconstructed and a reference patch.
using LocalLoss = std::function<double(std::span<const double>, std::span<const double>)>;

struct CRConfig {
  /// Softmax temperature applied to cosine similarities.
  double alpha = 10.0;
  int patch = 4;
  int stride = 4;
  /// Optional similarity encoder. When empty, similarity is a masked cosine:
  /// only elements known in the missing patch take part, which is the same as
  /// zero-filling its missing elements on both sides.
  PatchEncoder encoder;
  /// Defaults to mean absolute difference.
  LocalLoss local_loss;

  void validate() const;
};

struct PatchPosition {
  int y = 0;
  int x = 0;
  friend bool operator==(const PatchPosition&, const PatchPosition&) = default;
};

/// Patch decomposition of a feature map on a stride grid. The last row and
/// column of patches sit flush with the border when the stride does not tile.
struct PatchGrid {
  int height = 0;
  int width = 0;
  int channels = 0;
  int patch = 0;
  int stride = 0;
  std::vector<PatchPosition> positions;
  /// Raw p*p*C values per patch, row-major inside the patch.
  std::vector<std::vector<double>> vectors;
  /// Per patch, one flag per pixel (p*p) marking missing pixels.
  std::vector<std::vector<std::uint8_t>> missing;
  /// Patches with no missing pixel (V).
  std::vector<std::size_t> known;
  /// Patches with at least one missing pixel (V').
  std::vector<std::size_t> unknown;

  std::size_t patch_length() const { return std::size_t(patch) * std::size_t(patch) * std::size_t(channels); }
};

/// Origins along one axis of length `extent` for the given patch and stride.
std::vector<int> patch_origins(int extent, int patch, int stride);

PatchGrid extract_patches(const FeatureMap& feature, const BinaryMask& mask, const CRConfig& cfg);

/// |V'| x |V| cosine similarities (rows: missing patches, columns: known patches).
/// Norms are guarded by adding 1e-8 to each factor of the denominator.
/// Throws UninpaintableError when V is empty and InvalidArgument when V' is empty.
Eigen::MatrixXd similarity_matrix(const PatchGrid& grid, const CRConfig& cfg);

/// softmax(alpha * row) with max subtraction.
Eigen::VectorXd softmax_weights(const Eigen::VectorXd& similarities, double alpha);

/// Replaces every missing patch of `target` by the softmax-weighted average of
/// the known patches of `target`. Pixels covered by several missing patches get
/// the uniform mean of their reconstructions; pixels outside every missing
/// patch are copied unchanged.
FeatureMap reconstruct_patches(const PatchGrid& grid, const Eigen::MatrixXd& similarities,
                               const FeatureMap& target, const CRConfig& cfg);

/// Sum over missing patches of the local loss against `reference`.
double cr_loss(const FeatureMap& reconstructed, const FeatureMap& reference, const PatchGrid& grid,
               const CRConfig& cfg);

/// Coarse-to-fine patch inpainting on raw pixels. Output equals `hole_image`
/// exactly wherever the mask is false.
Raster cr_inpaint(const Raster& hole_image, const BinaryMask& mask, const CRConfig& cfg,
                  int pyramid_levels = 3);

}  // namespace scafrest
