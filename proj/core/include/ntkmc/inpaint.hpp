#pragma once

#include <Eigen/Core>
#include <vector>

#include "ntkmc/expand.hpp"
#include "ntkmc/image.hpp"
#include "ntkmc/solve.hpp"

namespace ntkmc {

/// Image plus observation mask (true = observed).
struct MaskedImage {
  Image image;
  BoolMatrix mask;

  /// Shapes agree, values finite, at least one observed and one missing
  /// pixel unless `allow_complete`.
  void validate(bool allow_complete = false) const;
};

struct InpaintReport {
  Eigen::Index observed = 0;
  Eigen::Index missing = 0;
  double ridge = 0.0;
  /// Direct mode: sum of regression weights over observed pixels for each
  /// missing pixel (min / mean / max).
  double weight_sum_min = 0.0;
  double weight_sum_mean = 0.0;
  double weight_sum_max = 0.0;
  /// Iterative mode only.
  IterativeReport iterative;
  bool used_iterative = false;
};

/// Kernel regression per channel on the observed pixels, predictions at the
/// missing ones, observed pixels copied through, output clipped to [0, 1].
/// Iterative mode uses a matrix-free kernel operator once the observed set
/// is too large to hold its Gram matrix.
Image inpaint(const MaskedImage& input, const KernelSource& kernel, const SolveOptions& opts,
              InpaintReport* report = nullptr);

/// Baseline: every missing pixel set to its channel's observed mean.
Image mean_fill(const MaskedImage& input);

/// K(i, j, :, :) of any kernel source.
Eigen::MatrixXd kernel_row(const KernelSource& kernel, Eigen::Index i, Eigen::Index j);

/// Gray image of percentile_view(kernel_row(kernel, i, j), pct).
Image heatmap(const KernelSource& kernel, Eigen::Index i, Eigen::Index j, double pct);

/// Kernel operator over a coordinate list that evaluates kernel entries on
/// the fly in row blocks; memory stays O(n * block).
class GramOperator final : public KernelOperator {
 public:
  GramOperator(const KernelSource& kernel, std::vector<Pixel> coords, Eigen::Index block = 512);

  Eigen::Index size() const override { return static_cast<Eigen::Index>(coords_.size()); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const override;
  Eigen::MatrixXd columns(const std::vector<Eigen::Index>& cols) const override;
  double trace() const override;

 private:
  const KernelSource& kernel_;
  std::vector<Pixel> coords_;
  Eigen::Index block_;
};

}  // namespace ntkmc
