#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "ntkmc/arch.hpp"
#include "ntkmc/dual.hpp"
#include "ntkmc/priors.hpp"

namespace ntkmc {

/// A rows*cols x rows*cols kernel with pixel (i, j) flattened to i*cols + j,
/// viewed as a 4-index tensor K(i, j, i', j').
struct PixelKernel {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::MatrixXd matrix;

  Eigen::Index flat(Eigen::Index i, Eigen::Index j) const { return i * cols + j; }
  double operator()(Eigen::Index i, Eigen::Index j, Eigen::Index i2, Eigen::Index j2) const {
    return matrix(flat(i, j), flat(i2, j2));
  }
};

/// Tensors tracked through the layer recursion.
///
/// Before an activation (`post_activation == false`) sigma is the
/// pre-activation covariance and k the tangent kernel. After an activation
/// sigma holds the post-activation covariance, sigma_dot the derivative
/// kernel, and k is still the tangent kernel of the layer below; the next
/// conv combines them.
struct CntkState {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd sigma_dot;
  Eigen::MatrixXd k;
  bool post_activation = false;
  /// Correlations that fell outside [-1, 1] by rounding and were clamped.
  std::size_t clamped = 0;
  /// Zero-variance pixels are tolerated: their activations and derivative
  /// terms are taken as identically zero, as in a finite network whose
  /// pre-activation there is the constant 0.
  bool allow_degenerate = false;

  Eigen::Index pixels() const { return rows * cols; }
  Eigen::Index flat(Eigen::Index i, Eigen::Index j) const { return i * cols + j; }
};

/// Input layer: windowed channel inner products with circular indexing,
/// sigma = k. Analytic priors give q^2 on the diagonal and q^2 * rho
/// elsewhere. A zero diagonal entry is a DomainError (degenerate prior)
/// unless allow_degenerate is set.
CntkState init_state(const ImagePrior& prior, int q, bool allow_degenerate = false);

/// Pointwise activation applied to a pre-activation state.
CntkState activate(const CntkState& state, const Activation& act);

/// Conv with q x q filters, circular padding, applied to a post-activation
/// state: sigma' = (1/q^2) sum_ab sigma(shifted),
/// k' = sigma' + (1/q^2) sum_ab (sigma_dot .* k)(shifted).
CntkState convolve(const CntkState& state, int q);

/// activate followed by convolve.
CntkState conv_activation_update(const CntkState& state, int q, const Activation& act);

/// Stride-2 subsampling of all three tensors at even coordinates.
CntkState downsample(const CntkState& state);
/// Each entry replicated into 2x2 blocks along both coordinate pairs.
CntkState upsample_nearest(const CntkState& state);
/// Align-corners bilinear factor-2 upsampling, applied to each tensor as
/// the quadratic form W T W^T.
CntkState upsample_bilinear(const CntkState& state);

/// Interpolation taps for one output coordinate of a factor-2 bilinear
/// upsampling of a length-d axis.
struct BilinearTap {
  Eigen::Index lo = 0;
  Eigen::Index hi = 0;
  double w_lo = 1.0;
  double w_hi = 0.0;
};
/// alpha = (d - 1) / (2d - 1); output i reads floor(alpha i) and the next
/// sample with weights 1 - frac and frac.
std::vector<BilinearTap> bilinear_taps(Eigen::Index d);

struct BuildReport {
  std::size_t clamped = 0;
  /// Pixels whose input window is all zero.
  std::size_t degenerate_pixels = 0;
};

struct BuildOptions {
  bool allow_degenerate = false;
};

/// Runs the full layer recursion and returns the final tangent kernel.
PixelKernel build_cntk(const ArchSpec& arch, const ImagePrior& prior, BuildReport* report = nullptr,
                       const BuildOptions& options = {});

/// Shift-invariant kernel K(i, j, i', j') = table((i - i') mod m, (j - j') mod n).
struct StationaryKernel {
  Eigen::MatrixXd table;

  Eigen::Index rows() const { return table.rows(); }
  Eigen::Index cols() const { return table.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j, Eigen::Index i2, Eigen::Index j2) const;
  PixelKernel materialize() const;
};

/// Offset table of the first-layer inner products. Throws
/// UnsupportedError when an explicit prior is not stationary (tolerance
/// 1e-10 relative to the largest entry).
Eigen::MatrixXd stationary_psi(const ImagePrior& prior, int q);

/// Closed-form kernel for archs without sampling layers and a stationary
/// prior, evaluated offset by offset with the scalar recursion.
StationaryKernel build_stationary(const ArchSpec& arch, const ImagePrior& prior);

/// K(i, j, :, :) as a rows x cols matrix.
Eigen::MatrixXd kernel_row(const PixelKernel& kernel, Eigen::Index i, Eigen::Index j);

/// Min-max normalizes `row` to [0, 1], then zeroes everything except the
/// top floor((1 - pct/100) * N) values (ties at the cut are zeroed).
Eigen::MatrixXd percentile_view(const Eigen::MatrixXd& row, double pct);

}  // namespace ntkmc
