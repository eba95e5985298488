#pragma once

// Independent reference implementations used by the unit and acceptance tests.
// They favour obviousness over speed and share no code with the library.

#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "scafrest/raster.hpp"

namespace scafrest::testing {

/// Two-class IoU averaged over classes, by direct per-pixel counting.
inline double miou_by_counting(const BinaryMask& pred, const BinaryMask& gt) {
  double total = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    long inter = 0, uni = 0;
    for (int y = 0; y < gt.height(); ++y) {
      for (int x = 0; x < gt.width(); ++x) {
        const bool p = pred.at(x, y) == bool(cls);
        const bool g = gt.at(x, y) == bool(cls);
        inter += (p && g) ? 1 : 0;
        uni += (p || g) ? 1 : 0;
      }
    }
    total += uni == 0 ? 1.0 : double(inter) / double(uni);
  }
  return total / 2.0;
}

/// Dense H x W x C volume indexed [y][x][c].
using Volume = std::vector<std::vector<std::vector<double>>>;

inline Volume make_volume(int h, int w, int c) {
  return Volume(std::size_t(h), std::vector<std::vector<double>>(std::size_t(w), std::vector<double>(std::size_t(c))));
}

/// Brute-force contextual reconstruction. Patches sit on the stride grid with
/// a final patch flush against the border. Similarity is the cosine over the
/// positions known in the missing patch (full vectors when none is known),
/// each norm guarded by +1e-8. Overlaps are averaged uniformly.
/// Returns nullopt when no patch is fully known.
inline std::optional<Volume> cr_bruteforce(const Volume& f, const std::vector<std::vector<bool>>& miss, int p, int s,
                                           double alpha) {
  const int h = int(f.size()), w = int(f[0].size()), ch = int(f[0][0].size());
  auto origins = [&](int n) {
    std::vector<int> o;
    for (int v = 0; v + p <= n; v += s) o.push_back(v);
    if (o.back() + p < n) o.push_back(n - p);
    return o;
  };
  struct P {
    int y, x;
    bool has_missing;
  };
  std::vector<P> patches;
  for (int y : origins(h)) {
    for (int x : origins(w)) {
      bool any = false;
      for (int dy = 0; dy < p; ++dy)
        for (int dx = 0; dx < p; ++dx) any = any || miss[std::size_t(y + dy)][std::size_t(x + dx)];
      patches.push_back({y, x, any});
    }
  }
  bool any_known = false, any_missing = false;
  for (const auto& q : patches) (q.has_missing ? any_missing : any_known) = true;
  if (!any_missing) return f;
  if (!any_known) return std::nullopt;

  Volume sum = make_volume(h, w, ch);
  std::vector<std::vector<int>> hits(static_cast<std::size_t>(h), std::vector<int>(std::size_t(w), 0));
  for (const auto& i : patches) {
    if (!i.has_missing) continue;
    bool patch_has_known = false;
    for (int dy = 0; dy < p; ++dy)
      for (int dx = 0; dx < p; ++dx) patch_has_known = patch_has_known || !miss[std::size_t(i.y + dy)][std::size_t(i.x + dx)];
    std::vector<double> sims;
    std::vector<const P*> known;
    for (const auto& j : patches) {
      if (j.has_missing) continue;
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (int dy = 0; dy < p; ++dy) {
        for (int dx = 0; dx < p; ++dx) {
          if (patch_has_known && miss[std::size_t(i.y + dy)][std::size_t(i.x + dx)]) continue;
          for (int c = 0; c < ch; ++c) {
            const double a = f[std::size_t(i.y + dy)][std::size_t(i.x + dx)][std::size_t(c)];
            const double b = f[std::size_t(j.y + dy)][std::size_t(j.x + dx)][std::size_t(c)];
            dot += a * b;
            na += a * a;
            nb += b * b;
          }
        }
      }
      sims.push_back(dot / ((std::sqrt(na) + 1e-8) * (std::sqrt(nb) + 1e-8)));
      known.push_back(&j);
    }
    double top = sims[0];
    for (double v : sims) top = std::max(top, v);
    std::vector<double> wts;
    double z = 0.0;
    for (double v : sims) {
      wts.push_back(std::exp(alpha * (v - top)));
      z += wts.back();
    }
    for (int dy = 0; dy < p; ++dy) {
      for (int dx = 0; dx < p; ++dx) {
        ++hits[std::size_t(i.y + dy)][std::size_t(i.x + dx)];
        for (int c = 0; c < ch; ++c) {
          double acc = 0.0;
          for (std::size_t k = 0; k < known.size(); ++k) {
            acc += wts[k] / z * f[std::size_t(known[k]->y + dy)][std::size_t(known[k]->x + dx)][std::size_t(c)];
          }
          sum[std::size_t(i.y + dy)][std::size_t(i.x + dx)][std::size_t(c)] += acc;
        }
      }
    }
  }
  Volume out = f;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (hits[std::size_t(y)][std::size_t(x)] > 0)
        for (int c = 0; c < ch; ++c)
          out[std::size_t(y)][std::size_t(x)][std::size_t(c)] = sum[std::size_t(y)][std::size_t(x)][std::size_t(c)] /
                                                                 hits[std::size_t(y)][std::size_t(x)];
  return out;
}

/// Region id of token (y, x) for a shifted-window mask on an n_h x n_w padded
/// grid, in the rolled frame: each axis splits into [0, n-w), [n-w, n-s), [n-s, n).
inline int swin_region_label(int y, int x, int n_h, int n_w, int win_h, int win_w, int s_h, int s_w) {
  auto slice = [](int v, int n, int win, int s) {
    if (v < n - win) return 0;
    if (v < n - s) return 1;
    return 2;
  };
  return 3 * slice(y, n_h, win_h, s_h) + slice(x, n_w, win_w, s_w);
}

/// Connected components over n nodes of an undirected edge list, by BFS.
inline int component_count(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (auto [a, b] : edges) {
    adj[std::size_t(a)].push_back(b);
    adj[std::size_t(b)].push_back(a);
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  int comps = 0;
  for (int s = 0; s < n; ++s) {
    if (seen[std::size_t(s)]) continue;
    ++comps;
    std::queue<int> q;
    q.push(s);
    seen[std::size_t(s)] = true;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[std::size_t(u)]) {
        if (!seen[std::size_t(v)]) {
          seen[std::size_t(v)] = true;
          q.push(v);
        }
      }
    }
  }
  return comps;
}

/// Closed-form Fréchet distance between 1-D Gaussians.
inline double frechet_1d(double mu1, double var1, double mu2, double var2) {
  return (mu1 - mu2) * (mu1 - mu2) + var1 + var2 - 2.0 * std::sqrt(var1 * var2);
}

}  // namespace scafrest::testing
