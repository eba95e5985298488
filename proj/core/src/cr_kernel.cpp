#include "scafrest/cr_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scafrest/error.hpp"

namespace scafrest {
namespace {

constexpr double kNormEpsilon = 1e-8;

double mean_abs_difference(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += std::abs(a[k] - b[k]);
  return a.empty() ? 0.0 : sum / double(a.size());
}

std::vector<double> read_patch(const FeatureMap& fm, PatchPosition pos, int p) {
  std::vector<double> v;
  v.reserve(std::size_t(p) * std::size_t(p) * std::size_t(fm.channels()));
  for (int dy = 0; dy < p; ++dy)
    for (int dx = 0; dx < p; ++dx)
      for (int c = 0; c < fm.channels(); ++c) v.push_back(fm.at(pos.y + dy, pos.x + dx, c));
  return v;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  return dot / ((std::sqrt(na) + kNormEpsilon) * (std::sqrt(nb) + kNormEpsilon));
}

// One pyramid level: a 2x box reduction where a coarse pixel is known if any
// of its fine pixels is known, and then holds the mean of those known pixels.
struct Level {
  FeatureMap image;
  BinaryMask mask;
};

Level reduce(const Level& fine) {
  const int h = (fine.image.height() + 1) / 2;
  const int w = (fine.image.width() + 1) / 2;
  const int ch = fine.image.channels();
  Level out{FeatureMap(h, w, ch), BinaryMask(w, h, true)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int known = 0;
      std::vector<double> acc(std::size_t(ch), 0.0);
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int fy = 2 * y + dy;
          const int fx = 2 * x + dx;
          if (fy >= fine.image.height() || fx >= fine.image.width() || fine.mask.at(fx, fy)) continue;
          ++known;
          for (int c = 0; c < ch; ++c) acc[std::size_t(c)] += fine.image.at(fy, fx, c);
        }
      }
      if (known == 0) continue;
      out.mask.set(x, y, false);
      for (int c = 0; c < ch; ++c) out.image.at(y, x, c) = acc[std::size_t(c)] / known;
    }
  }
  return out;
}

// Reconstructs one level, shrinking the patch until at least one patch is fully known.
FeatureMap fill_level(const FeatureMap& feature, const BinaryMask& mask, const CRConfig& cfg) {
  CRConfig local = cfg;
  for (;;) {
    PatchGrid grid = extract_patches(feature, mask, local);
    if (grid.unknown.empty()) return feature;
    if (!grid.known.empty()) {
      return reconstruct_patches(grid, similarity_matrix(grid, local), feature, local);
    }
    if (local.patch == 1) throw UninpaintableError("no known region");
    local.patch = std::max(1, local.patch / 2);
    local.stride = std::min(local.stride, local.patch);
  }
}

}  // namespace

void CRConfig::validate() const {
  if (!(alpha >= 0.0)) throw InvalidArgument("cr: alpha must be >= 0");
  if (patch < 1) throw InvalidArgument("cr: patch side must be >= 1");
  if (stride < 1 || stride > patch) throw InvalidArgument("cr: stride must lie in [1, patch]");
}

std::vector<int> patch_origins(int extent, int patch, int stride) {
  std::vector<int> origins;
  if (extent < patch) return origins;
  for (int o = 0; o + patch <= extent; o += stride) origins.push_back(o);
  if (origins.back() + patch < extent) origins.push_back(extent - patch);
  return origins;
}

PatchGrid extract_patches(const FeatureMap& feature, const BinaryMask& mask, const CRConfig& cfg) {
  cfg.validate();
  if (mask.width() != feature.width() || mask.height() != feature.height()) {
    throw InvalidArgument("extract_patches: mask does not match feature size");
  }
  if (feature.height() < cfg.patch || feature.width() < cfg.patch) {
    throw InvalidArgument("extract_patches: feature map smaller than one patch");
  }
  PatchGrid g;
  g.height = feature.height();
  g.width = feature.width();
  g.channels = feature.channels();
  g.patch = cfg.patch;
  g.stride = cfg.stride;
  const auto ys = patch_origins(g.height, g.patch, g.stride);
  const auto xs = patch_origins(g.width, g.patch, g.stride);
  for (int y : ys) {
    for (int x : xs) {
      const PatchPosition pos{y, x};
      std::vector<std::uint8_t> miss(std::size_t(g.patch) * std::size_t(g.patch));
      bool any = false;
      for (int dy = 0; dy < g.patch; ++dy) {
        for (int dx = 0; dx < g.patch; ++dx) {
          const bool m = mask.at(x + dx, y + dy);
          miss[std::size_t(dy) * std::size_t(g.patch) + std::size_t(dx)] = m ? 1 : 0;
          any = any || m;
        }
      }
      (any ? g.unknown : g.known).push_back(g.positions.size());
      g.positions.push_back(pos);
      g.vectors.push_back(read_patch(feature, pos, g.patch));
      g.missing.push_back(std::move(miss));
    }
  }
  return g;
}

Eigen::MatrixXd similarity_matrix(const PatchGrid& grid, const CRConfig& cfg) {
  if (grid.known.empty()) throw UninpaintableError("no known region");
  if (grid.unknown.empty()) throw InvalidArgument("nothing to reconstruct");
  const auto rows = Eigen::Index(grid.unknown.size());
  const auto cols = Eigen::Index(grid.known.size());
  Eigen::MatrixXd s(rows, cols);

  if (cfg.encoder) {
    std::vector<std::vector<double>> enc_known(grid.known.size());
    for (std::size_t j = 0; j < grid.known.size(); ++j) enc_known[j] = cfg.encoder(grid.vectors[grid.known[j]]);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto a = cfg.encoder(grid.vectors[grid.unknown[std::size_t(i)]]);
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (a.size() != enc_known[std::size_t(j)].size()) throw InvalidArgument("encoder output lengths differ");
        s(i, j) = cosine(a, enc_known[std::size_t(j)]);
      }
    }
    return s;
  }

  const std::size_t ch = std::size_t(grid.channels);
  std::vector<std::size_t> active;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::size_t pi = grid.unknown[std::size_t(i)];
    const auto& a = grid.vectors[pi];
    const auto& miss = grid.missing[pi];
    active.clear();
    for (std::size_t px = 0; px < miss.size(); ++px) {
      if (miss[px]) continue;
      for (std::size_t c = 0; c < ch; ++c) active.push_back(px * ch + c);
    }
    if (active.empty()) {
      // Nothing known inside the patch: compare whatever the map holds there.
      for (Eigen::Index j = 0; j < cols; ++j) s(i, j) = cosine(a, grid.vectors[grid.known[std::size_t(j)]]);
      continue;
    }
    double na = 0.0;
    for (std::size_t k : active) na += a[k] * a[k];
    const double norm_a = std::sqrt(na) + kNormEpsilon;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& b = grid.vectors[grid.known[std::size_t(j)]];
      double dot = 0.0, nb = 0.0;
      for (std::size_t k : active) {
        dot += a[k] * b[k];
        nb += b[k] * b[k];
      }
      s(i, j) = dot / (norm_a * (std::sqrt(nb) + kNormEpsilon));
    }
  }
  return s;
}

Eigen::VectorXd softmax_weights(const Eigen::VectorXd& similarities, double alpha) {
  Eigen::VectorXd w(similarities.size());
  if (similarities.size() == 0) return w;
  const double top = alpha * similarities.maxCoeff();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < similarities.size(); ++j) {
    w[j] = std::exp(alpha * similarities[j] - top);
    sum += w[j];
  }
  return w / sum;
}

FeatureMap reconstruct_patches(const PatchGrid& grid, const Eigen::MatrixXd& similarities,
                               const FeatureMap& target, const CRConfig& cfg) {
  if (target.height() != grid.height || target.width() != grid.width || target.channels() != grid.channels) {
    throw InvalidArgument("reconstruct_patches: target does not match the patch grid");
  }
  if (similarities.rows() != Eigen::Index(grid.unknown.size()) ||
      similarities.cols() != Eigen::Index(grid.known.size())) {
    throw InvalidArgument("reconstruct_patches: similarity matrix shape mismatch");
  }
  const int p = grid.patch;
  const int ch = grid.channels;
  std::vector<std::vector<double>> known_patches(grid.known.size());
  for (std::size_t j = 0; j < grid.known.size(); ++j) {
    known_patches[j] = read_patch(target, grid.positions[grid.known[j]], p);
  }

  FeatureMap sum(grid.height, grid.width, ch);
  std::vector<int> hits(std::size_t(grid.height) * std::size_t(grid.width), 0);
  std::vector<double> blended(grid.patch_length());
  for (std::size_t i = 0; i < grid.unknown.size(); ++i) {
    const Eigen::VectorXd w = softmax_weights(similarities.row(Eigen::Index(i)).transpose(), cfg.alpha);
    std::fill(blended.begin(), blended.end(), 0.0);
    for (std::size_t j = 0; j < known_patches.size(); ++j) {
      const double wj = w[Eigen::Index(j)];
      for (std::size_t k = 0; k < blended.size(); ++k) blended[k] += wj * known_patches[j][k];
    }
    const PatchPosition pos = grid.positions[grid.unknown[i]];
    std::size_t k = 0;
    for (int dy = 0; dy < p; ++dy) {
      for (int dx = 0; dx < p; ++dx) {
        ++hits[std::size_t(pos.y + dy) * std::size_t(grid.width) + std::size_t(pos.x + dx)];
        for (int c = 0; c < ch; ++c) sum.at(pos.y + dy, pos.x + dx, c) += blended[k++];
      }
    }
  }

  FeatureMap out = target;
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      const int n = hits[std::size_t(y) * std::size_t(grid.width) + std::size_t(x)];
      if (n == 0) continue;
      for (int c = 0; c < ch; ++c) out.at(y, x, c) = sum.at(y, x, c) / n;
    }
  }
  return out;
}

double cr_loss(const FeatureMap& reconstructed, const FeatureMap& reference, const PatchGrid& grid,
               const CRConfig& cfg) {
  if (!(reconstructed.height() == reference.height() && reconstructed.width() == reference.width() &&
        reconstructed.channels() == reference.channels())) {
    throw InvalidArgument("cr_loss: shape mismatch");
  }
  if (reconstructed.height() != grid.height || reconstructed.width() != grid.width) {
    throw InvalidArgument("cr_loss: maps do not match the patch grid");
  }
  double total = 0.0;
  for (std::size_t idx : grid.unknown) {
    const auto a = read_patch(reconstructed, grid.positions[idx], grid.patch);
    const auto b = read_patch(reference, grid.positions[idx], grid.patch);
    total += cfg.local_loss ? cfg.local_loss(a, b) : mean_abs_difference(a, b);
  }
  return total;
}

Raster cr_inpaint(const Raster& hole_image, const BinaryMask& mask, const CRConfig& cfg, int pyramid_levels) {
  cfg.validate();
  if (hole_image.width() != mask.width() || hole_image.height() != mask.height()) {
    throw InvalidArgument("cr_inpaint: mask does not match image size");
  }
  if (pyramid_levels < 1) throw InvalidArgument("cr_inpaint: pyramid_levels must be >= 1");
  const std::size_t holes = mask.count();
  if (holes == 0) return hole_image;
  if (holes == mask.pixel_count()) throw UninpaintableError("mask covers the whole image");
  if (hole_image.width() < cfg.patch || hole_image.height() < cfg.patch) {
    throw InvalidArgument("cr_inpaint: image smaller than one patch");
  }

  std::vector<Level> levels;
  levels.push_back({to_feature_map(hole_image), mask});
  while (int(levels.size()) < pyramid_levels) {
    const Level& f = levels.back();
    if ((f.image.height() + 1) / 2 < cfg.patch || (f.image.width() + 1) / 2 < cfg.patch) break;
    levels.push_back(reduce(f));
  }

  FeatureMap estimate;
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    FeatureMap feature = it->image;
    const FeatureMap guess = estimate.size() == 0 ? FeatureMap(feature.height(), feature.width(), feature.channels())
                                                  : resize_bilinear(estimate, feature.height(), feature.width());
    for (int y = 0; y < feature.height(); ++y)
      for (int x = 0; x < feature.width(); ++x)
        if (it->mask.at(x, y))
          for (int c = 0; c < feature.channels(); ++c) feature.at(y, x, c) = guess.at(y, x, c);

    estimate = fill_level(feature, it->mask, cfg);
    for (int y = 0; y < feature.height(); ++y)
      for (int x = 0; x < feature.width(); ++x)
        if (!it->mask.at(x, y))
          for (int c = 0; c < feature.channels(); ++c) estimate.at(y, x, c) = feature.at(y, x, c);
  }

  // Known pixels come straight from the input samples so they match bit for bit.
  std::vector<float> out(hole_image.samples().begin(), hole_image.samples().end());
  const int ch = hole_image.channels();
  for (int y = 0; y < hole_image.height(); ++y) {
    for (int x = 0; x < hole_image.width(); ++x) {
      if (!mask.at(x, y)) continue;
      for (int c = 0; c < ch; ++c) {
        out[(std::size_t(y) * std::size_t(hole_image.width()) + std::size_t(x)) * std::size_t(ch) + std::size_t(c)] =
            float(estimate.at(y, x, c));
      }
    }
  }
  return Raster(hole_image.width(), hole_image.height(), hole_image.space(), std::move(out));
}

}  // namespace scafrest
