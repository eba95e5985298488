#include "scafrest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "scafrest/error.hpp"

namespace scafrest {
namespace {

void require_same_shape(const Raster& a, const Raster& b, const char* op) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch");
  }
  if (a.empty()) throw InvalidArgument(std::string(op) + ": empty image");
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double c = 0.5 * double(size - 1);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = double(i) - c;
    k[std::size_t(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[std::size_t(i)];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Valid-region separable filter of a w x h plane; output is (w-k+1) x (h-k+1).
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h,
                                 const std::vector<double>& k) {
  const int ks = int(k.size());
  const int ow = w - ks + 1;
  const int oh = h - ks + 1;
  std::vector<double> tmp(std::size_t(ow) * std::size_t(h));
  for (int y = 0; y < h; ++y) {
    const double* row = plane.data() + std::size_t(y) * std::size_t(w);
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < ks; ++i) acc += k[std::size_t(i)] * row[x + i];
      tmp[std::size_t(y) * std::size_t(ow) + std::size_t(x)] = acc;
    }
  }
  std::vector<double> out(std::size_t(ow) * std::size_t(oh));
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < ks; ++i) acc += k[std::size_t(i)] * tmp[std::size_t(y + i) * std::size_t(ow) + std::size_t(x)];
      out[std::size_t(y) * std::size_t(ow) + std::size_t(x)] = acc;
    }
  }
  return out;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Eigen-decomposition based square root of a symmetric PSD matrix.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(m));
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = ev[i] < 1e-10 ? 0.0 : std::sqrt(ev[i]);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

void require_psd(const Eigen::MatrixXd& cov, const char* which) {
  if (cov.rows() != cov.cols()) throw InvalidArgument(std::string(which) + " covariance is not square");
  if (cov.size() == 0) return;
  const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if (asym > 1e-9 * scale) throw InvalidArgument(std::string(which) + " covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(cov), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8 * scale) {
    throw InvalidArgument(std::string(which) + " covariance is not positive semidefinite");
  }
}

}  // namespace

double miou(const BinaryMask& prediction, const BinaryMask& ground_truth) {
  if (prediction.width() != ground_truth.width() || prediction.height() != ground_truth.height()) {
    throw InvalidArgument("miou: dimension mismatch");
  }
  // Confusion counts: [pred][gt].
  std::size_t n[2][2] = {{0, 0}, {0, 0}};
  const auto p = prediction.bits();
  const auto g = ground_truth.bits();
  for (std::size_t i = 0; i < p.size(); ++i) ++n[p[i]][g[i]];

  double sum = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    const std::size_t inter = n[cls][cls];
    const std::size_t uni = n[cls][0] + n[cls][1] + n[0][cls] + n[1][cls] - inter;
    sum += uni == 0 ? 1.0 : double(inter) / double(uni);
  }
  return sum / 2.0;
}

double mae(const Raster& restored, const Raster& gt) {
  require_same_shape(restored, gt, "mae");
  const auto a = restored.samples();
  const auto b = gt.samples();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(double(a[i]) - double(b[i]));
  return sum / double(a.size());
}

double mse(const Raster& restored, const Raster& gt) {
  require_same_shape(restored, gt, "mse");
  const auto a = restored.samples();
  const auto b = gt.samples();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) - double(b[i]);
    sum += d * d;
  }
  return sum / double(a.size());
}

double psnr(const Raster& restored, const Raster& gt) {
  const double e = mse(restored, gt);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / e);
}

SsimResult ssim_detailed(const Raster& restored, const Raster& gt, const SsimParams& params) {
  require_same_shape(restored, gt, "ssim");
  const int w = restored.width();
  const int h = restored.height();
  if (w < params.window || h < params.window) {
    throw InvalidArgument("ssim: image smaller than the " + std::to_string(params.window) + "x" +
                          std::to_string(params.window) + " window");
  }
  const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
  const double c2 = (params.k2 * params.dynamic_range) * (params.k2 * params.dynamic_range);
  const auto kernel = gaussian_kernel(params.window, params.sigma);
  const int ch = restored.channels();
  const std::size_t n = restored.pixel_count();

  double ssim_sum = 0.0;
  double cs_sum = 0.0;
  std::size_t count = 0;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (int c = 0; c < ch; ++c) {
    const auto a = restored.samples();
    const auto b = gt.samples();
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = a[i * std::size_t(ch) + std::size_t(c)];
      y[i] = b[i * std::size_t(ch) + std::size_t(c)];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, w, h, kernel);
    const auto my = filter_valid(y, w, h, kernel);
    const auto sxx = filter_valid(xx, w, h, kernel);
    const auto syy = filter_valid(yy, w, h, kernel);
    const auto sxy = filter_valid(xy, w, h, kernel);
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      const double lum = (2.0 * mx[i] * my[i] + c1) / (mx[i] * mx[i] + my[i] * my[i] + c1);
      const double cs = (2.0 * cov + c2) / (vx + vy + c2);
      ssim_sum += lum * cs;
      cs_sum += cs;
    }
    count += mx.size();
  }
  return {ssim_sum / double(count), cs_sum / double(count)};
}

double ssim(const Raster& restored, const Raster& gt, const SsimParams& params) {
  return ssim_detailed(restored, gt, params).ssim;
}

GaussianMoments fit_gaussian(const std::vector<Eigen::VectorXd>& vectors) {
  if (vectors.size() < 2) throw InvalidArgument("fit_gaussian needs at least 2 vectors");
  const Eigen::Index d = vectors.front().size();
  Eigen::MatrixXd data(Eigen::Index(vectors.size()), d);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != d) throw InvalidArgument("fit_gaussian: vectors differ in dimension");
    data.row(Eigen::Index(i)) = vectors[i].transpose();
  }
  GaussianMoments m;
  m.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - m.mean.transpose();
  m.cov = symmetrize(centered.transpose() * centered / double(vectors.size() - 1));
  return m;
}

double frechet_distance(const GaussianMoments& a, const GaussianMoments& b) {
  const Eigen::Index d = a.mean.size();
  if (b.mean.size() != d || a.cov.rows() != d || b.cov.rows() != d) {
    throw InvalidArgument("frechet_distance: dimension mismatch");
  }
  require_psd(a.cov, "first");
  require_psd(b.cov, "second");
  if (a.mean == b.mean && a.cov == b.cov) return 0.0;

  const Eigen::MatrixXd root_a = psd_sqrt(a.cov);
  const Eigen::MatrixXd inner = symmetrize(root_a * b.cov * root_a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
  double trace_sqrt = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double ev = es.eigenvalues()[i];
    if (ev > 0.0) trace_sqrt += std::sqrt(ev);
  }
  const double dist = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * trace_sqrt;
  return std::max(dist, 0.0);
}

Eigen::VectorXd pixel_embedding(const Raster& img, int side) {
  if (side < 1) throw InvalidArgument("pixel_embedding: side must be >= 1");
  const Raster small = bilinear_resample(to_gray(img), side, side);
  const auto s = small.samples();
  Eigen::VectorXd v(Eigen::Index(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) v[Eigen::Index(i)] = s[i];
  return v;
}

double frechet_between(const std::vector<Raster>& a, const std::vector<Raster>& b, const Embedding& embed) {
  std::vector<Eigen::VectorXd> ea, eb;
  ea.reserve(a.size());
  eb.reserve(b.size());
  for (const auto& img : a) ea.push_back(embed(img));
  for (const auto& img : b) eb.push_back(embed(img));
  return frechet_distance(fit_gaussian(ea), fit_gaussian(eb));
}

}  // namespace scafrest
