#pragma once

#include <Eigen/Core>

namespace ntkmc {

/// <vec(pred), vec(truth)> / (|pred| |truth|): the uncentered correlation
/// of the vectorized matrices. Zero-norm input is a DomainError.
double uncentered_pearson_r(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

/// Mean over columns of 1 - SSE / SST with the column mean as baseline.
/// A constant truth column is a DomainError naming it.
double mean_r2(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

/// Mean over columns of the cosine between pred and truth columns.
double mean_cosine(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

/// Per-fold metric differences from r rounds of k-fold cross-validation.
struct FoldDifferences {
  Eigen::MatrixXd d;  // k x r
  long n1 = 0;        // training set size
  long n2 = 0;        // test set size
};

struct TStatistic {
  double t = 0.0;
  int dof = 0;
};

/// Corrected repeated k-fold statistic mean(d) / ((1/(kr) + n2/n1) s^2),
/// s^2 the sample variance of the kr differences, dof = kr - 1. With
/// `sqrt_denominator` the denominator is sqrt((1/(kr) + n2/n1) s^2).
TStatistic corrected_t(const FoldDifferences& fd, bool sqrt_denominator = false);

/// 10 log10(1 / MSE) for images in [0, 1]; +infinity when identical.
double psnr(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

/// Gaussian-window SSIM (11 x 11, sigma 1.5, K1 = 0.01, K2 = 0.03, data
/// range 1, population statistics), averaged over the window-valid region.
double ssim(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

}  // namespace ntkmc
