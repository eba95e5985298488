#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "scafrest/raster.hpp"

namespace scafrest {

/// Mean IoU over the two classes (scaffold = true, background = false).
/// A class absent from both masks counts as IoU 1.
double miou(const BinaryMask& prediction, const BinaryMask& ground_truth);

/// Mean |a - b| over all samples.
double mae(const Raster& restored, const Raster& gt);

/// Mean squared error over all samples.
double mse(const Raster& restored, const Raster& gt);

/// 10 log10(1 / MSE) in dB with dynamic range 1. Identical inputs give +infinity.
double psnr(const Raster& restored, const Raster& gt);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

struct SsimResult {
  double ssim = 0.0;
  /// Mean of the contrast-structure factor alone (the luminance term dropped).
  double contrast_structure = 0.0;
};

/// Mean local SSIM over all fully-contained windows, computed per channel and
/// averaged across channels. Throws InvalidArgument when either side is
/// smaller than the window.
double ssim(const Raster& restored, const Raster& gt, const SsimParams& params = {});
SsimResult ssim_detailed(const Raster& restored, const Raster& gt, const SsimParams& params = {});

/// Gaussian moments of an embedding distribution.
struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Sample mean and unbiased (n - 1) covariance of row vectors. Needs >= 2 rows.
GaussianMoments fit_gaussian(const std::vector<Eigen::VectorXd>& vectors);

/// ||mu1 - mu2||^2 + tr(S1 + S2 - 2 (S1 S2)^{1/2}).
///
/// The trace term is evaluated as tr((S1^{1/2} S2 S1^{1/2})^{1/2}), which is
/// similar to (S1 S2)^{1/2} but symmetric, so a self-adjoint eigen solver
/// applies. Eigenvalues of S1 below 1e-10 and negative eigenvalues of the
/// product are clamped to zero. Identical moments give exactly 0.
double frechet_distance(const GaussianMoments& a, const GaussianMoments& b);

/// Grayscale, bilinear resample to side x side, flattened row-major.
Eigen::VectorXd pixel_embedding(const Raster& img, int side);

using Embedding = std::function<Eigen::VectorXd(const Raster&)>;

/// Fréchet distance between the embedded distributions of two image sets.
double frechet_between(const std::vector<Raster>& a, const std::vector<Raster>& b,
                       const Embedding& embed);

}  // namespace scafrest
