#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ntkmc {

/// Diagonal regularization added to the kernel before solving.
struct Ridge {
  enum class Kind { None, Absolute, TraceScaled };

  Kind kind = Kind::None;
  double value = 0.0;

  static Ridge none() { return {}; }
  static Ridge absolute(double lambda) { return {Kind::Absolute, lambda}; }
  /// lambda = c * tr(K) / n, e.g. c = 4e-5.
  static Ridge trace_scaled(double c) { return {Kind::TraceScaled, c}; }

  /// "none", "abs:<lambda>" or "trace:<c>".
  static Ridge parse(const std::string& text);
  std::string to_string() const;

  /// Amount added to the diagonal for a kernel with the given trace and size.
  double amount(double trace, Eigen::Index n) const;
};

struct SolveOptions {
  enum class Mode { Direct, Iterative };

  Mode mode = Mode::Direct;
  Ridge ridge;
  /// Multiplies the kernel (and every cross-kernel used for prediction).
  double kernel_scale = 1.0;
  int epochs = 50;
  int preconditioner_rank = 160;
  int subsample = 4000;
  std::uint64_t seed = 0;
  /// Largest system handed to the direct solver.
  Eigen::Index direct_cap = 30000;

  void validate() const;
};

/// One factorization of (scale * K + ridge * I), reused for any number of
/// right-hand sides. Cholesky first; partial-pivot LU when Cholesky fails or
/// is numerically rank deficient. Singular systems throw NumericError.
class DirectSolver {
 public:
  DirectSolver(const Eigen::MatrixXd& kernel, const SolveOptions& opts);

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

  Eigen::Index size() const { return n_; }
  bool used_cholesky() const { return llt_.has_value(); }
  double ridge() const { return ridge_; }
  double kernel_scale() const { return scale_; }

 private:
  Eigen::Index n_ = 0;
  double ridge_ = 0.0;
  double scale_ = 1.0;
  std::optional<Eigen::LLT<Eigen::MatrixXd>> llt_;
  std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

Eigen::MatrixXd direct_solve(const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& rhs,
                             const SolveOptions& opts);

/// Matrix-free access to a symmetric kernel for the iterative solver.
class KernelOperator {
 public:
  virtual ~KernelOperator() = default;
  virtual Eigen::Index size() const = 0;
  /// K * x for an n x r block.
  virtual Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const = 0;
  /// K(:, cols) as an n x |cols| block.
  virtual Eigen::MatrixXd columns(const std::vector<Eigen::Index>& cols) const = 0;
  /// tr(K); needed for trace-scaled ridge.
  virtual double trace() const = 0;
};

/// Non-owning view of a dense kernel; the matrix must outlive the operator.
class DenseKernelOperator final : public KernelOperator {
 public:
  explicit DenseKernelOperator(const Eigen::MatrixXd& kernel) : kernel_(kernel) {}

  Eigen::Index size() const override { return kernel_.rows(); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const override;
  Eigen::MatrixXd columns(const std::vector<Eigen::Index>& cols) const override;
  double trace() const override { return kernel_.trace(); }

 private:
  const Eigen::MatrixXd& kernel_;
};

struct IterativeReport {
  /// Relative residual ||rhs - K alpha|| / ||rhs|| at the end of each epoch;
  /// entry 0 is the starting point (alpha = 0).
  std::vector<double> residuals;
  int rank = 0;
  Eigen::Index subsample = 0;
  /// Estimated (k+1)-th eigenvalue of the scaled kernel; step = 1 / this.
  double tail_eigenvalue = 0.0;
  double step = 0.0;
  std::uint64_t seed = 0;
};

struct IterativeResult {
  Eigen::MatrixXd coefficients;
  IterativeReport report;
};

/// Preconditioned Richardson iteration on (scale * K + ridge) alpha = rhs
/// with a spectral-deflation preconditioner built from the top
/// `preconditioner_rank` eigenpairs of a subsampled kernel block. One kernel
/// product per epoch. Throws NumericError when the residual grows tenfold in
/// one epoch.
IterativeResult iterative_solve(const KernelOperator& kernel, const Eigen::MatrixXd& rhs,
                                const SolveOptions& opts);

/// cross_kernel is n_train x n_test; returns n_test x r predictions
/// kernel_scale * cross_kernel^T * coefficients.
Eigen::MatrixXd predict(const Eigen::MatrixXd& coefficients, const Eigen::MatrixXd& cross_kernel,
                        double kernel_scale = 1.0);

}  // namespace ntkmc
