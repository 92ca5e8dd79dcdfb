#include "ntkmc/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ntkmc/errors.hpp"

namespace ntkmc {

namespace {

void same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << "shape mismatch: " << a.rows() << " x " << a.cols() << " vs " << b.rows() << " x " << b.cols();
    throw ShapeError(msg.str());
  }
  if (a.size() == 0) throw ShapeError("metric of empty matrices");
}

double cosine(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
              const char* what) {
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw DomainError(std::string(what) + " has zero norm");
  return a.dot(b) / (na * nb);
}

}  // namespace

double uncentered_pearson_r(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  same_shape(pred, truth);
  return cosine(pred.reshaped(), truth.reshaped(), "input");
}

double mean_r2(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  same_shape(pred, truth);
  double total = 0.0;
  for (Eigen::Index c = 0; c < truth.cols(); ++c) {
    const double mean = truth.col(c).mean();
    const double sst = (truth.col(c).array() - mean).square().sum();
    if (!(sst > 0.0)) throw DomainError("truth column " + std::to_string(c) + " is constant; R^2 undefined");
    total += 1.0 - (pred.col(c) - truth.col(c)).squaredNorm() / sst;
  }
  return total / static_cast<double>(truth.cols());
}

double mean_cosine(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  same_shape(pred, truth);
  double total = 0.0;
  for (Eigen::Index c = 0; c < truth.cols(); ++c)
    total += cosine(pred.col(c), truth.col(c), ("column " + std::to_string(c)).c_str());
  return total / static_cast<double>(truth.cols());
}

TStatistic corrected_t(const FoldDifferences& fd, bool sqrt_denominator) {
  const Eigen::Index kr = fd.d.size();
  if (kr < 2) throw ShapeError("corrected t needs at least two fold differences");
  if (fd.n1 <= 0 || fd.n2 <= 0) throw DomainError("train and test sizes must be positive");
  const double mean = fd.d.mean();
  const double var = (fd.d.array() - mean).square().sum() / static_cast<double>(kr - 1);
  if (!(var > 0.0)) throw DomainError("fold differences have zero variance");
  const double scale = 1.0 / static_cast<double>(kr) + static_cast<double>(fd.n2) / static_cast<double>(fd.n1);
  const double denom = sqrt_denominator ? std::sqrt(scale * var) : scale * var;
  return {mean / denom, static_cast<int>(kr - 1)};
}

double psnr(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  same_shape(pred, truth);
  const double mse = (pred - truth).squaredNorm() / static_cast<double>(pred.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

// Separable normalized Gaussian filter, "valid" region only.
Eigen::MatrixXd gaussian_valid(const Eigen::MatrixXd& x) {
  Eigen::VectorXd g(kWindow);
  for (int k = 0; k < kWindow; ++k) {
    const double t = k - (kWindow - 1) / 2;
    g(k) = std::exp(-t * t / (2.0 * kSigma * kSigma));
  }
  g /= g.sum();
  const Eigen::Index rows = x.rows() - kWindow + 1, cols = x.cols() - kWindow + 1;
  Eigen::MatrixXd tmp(rows, x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    for (Eigen::Index r = 0; r < rows; ++r) tmp(r, c) = g.dot(x.col(c).segment(r, kWindow));
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = g.dot(tmp.row(r).segment(c, kWindow).transpose());
  return out;
}

}  // namespace

double ssim(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  same_shape(pred, truth);
  if (pred.rows() < kWindow || pred.cols() < kWindow) {
    std::ostringstream msg;
    msg << "SSIM needs images of at least " << kWindow << " x " << kWindow;
    throw ShapeError(msg.str());
  }
  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  const Eigen::ArrayXXd mx = gaussian_valid(pred).array();
  const Eigen::ArrayXXd my = gaussian_valid(truth).array();
  const Eigen::ArrayXXd sxx = gaussian_valid(pred.cwiseProduct(pred)).array() - mx * mx;
  const Eigen::ArrayXXd syy = gaussian_valid(truth.cwiseProduct(truth)).array() - my * my;
  const Eigen::ArrayXXd sxy = gaussian_valid(pred.cwiseProduct(truth)).array() - mx * my;
  const Eigen::ArrayXXd map =
      ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
  return map.mean();
}

}  // namespace ntkmc
