#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "ntkmc/dual.hpp"
#include "ntkmc/solve.hpp"

namespace ntkmc {

/// Column embeddings z^(j) of a p x n feature prior, unit-normalized.
struct FeaturePrior {
  Eigen::MatrixXd data;
  /// Column norms before normalization.
  Eigen::VectorXd column_norms;

  Eigen::Index dim() const { return data.rows(); }
  Eigen::Index size() const { return data.cols(); }
};

/// Unit-normalizes every column. A zero column is a DomainError naming it.
FeaturePrior normalize_prior(const Eigen::MatrixXd& raw);

/// Stacks s * I (n x n) below a p x n prior, giving (p + n) x n. Applied
/// before normalization it makes the column kernel positive definite.
Eigen::MatrixXd augment_identity(const Eigen::MatrixXd& raw, double s = 1.5);

struct Observation {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double value = 0.0;
};

/// Observed entries of an m x n matrix. Indices are range-checked and
/// duplicates rejected on insertion.
class ObservationSet {
 public:
  ObservationSet(Eigen::Index rows, Eigen::Index cols);

  void add(Eigen::Index row, Eigen::Index col, double value);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const std::vector<Observation>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Observed columns of each row, ascending, with matching values.
  std::vector<std::vector<Eigen::Index>> columns_by_row() const;
  std::vector<std::vector<double>> values_by_row() const;

  /// Non-NaN entries are observations.
  static ObservationSet from_dense(const Eigen::MatrixXd& matrix);
  /// `row,col,value` CSV with a header line. Shape defaults to max index + 1.
  static ObservationSet from_triples_csv(const std::string& path, Eigen::Index rows = 0,
                                         Eigen::Index cols = 0);
  /// Missing entries are NaN.
  Eigen::MatrixXd to_dense() const;

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
  std::vector<Observation> entries_;
  std::unordered_set<Eigen::Index> seen_;
};

/// n x n matrix of kappa_d(<z^(j), z^(j')>).
struct ColumnKernel {
  Eigen::MatrixXd matrix;
  int depth = 1;
  Activation activation;
};

ColumnKernel column_kernel(const FeaturePrior& prior, int depth, const Activation& act);

/// Observed entries sorted row-major.
std::vector<Observation> row_major(const ObservationSet& obs);

/// Kernel between observed entries in row-major order:
/// K[(i, j), (i', j')] = [i == i'] * kernel(j, j'). Entries in different
/// rows never interact.
Eigen::MatrixXd observation_kernel(const ObservationSet& obs, const ColumnKernel& kernel);

/// k(M_ij): kernel between entry (i, j) and every observed entry, in the
/// same order as observation_kernel.
Eigen::VectorXd observation_cross(const ObservationSet& obs, const ColumnKernel& kernel, Eigen::Index i,
                                  Eigen::Index j);

struct CompletionReport {
  /// Number of distinct observation patterns, i.e. factorizations done.
  std::size_t factorizations = 0;
  bool shared_pattern = false;
  double ridge = 0.0;
  /// Iterative mode only: final relative residual of the worst pattern.
  double max_residual = 0.0;
};

/// One factorization of the kernel restricted to a column set that every
/// row observes; back-substitution handles all rows at once.
class SharedPatternSolver {
 public:
  SharedPatternSolver(const ColumnKernel& kernel, std::vector<Eigen::Index> columns,
                      const SolveOptions& opts);

  /// values: |columns| x r, one column per matrix row. Returns n x r
  /// predictions for every matrix column.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& values) const;

  const std::vector<Eigen::Index>& columns() const { return columns_; }
  double ridge() const { return solver_.ridge(); }

 private:
  std::vector<Eigen::Index> columns_;
  Eigen::MatrixXd cross_;  // |columns| x n
  DirectSolver solver_;
};

/// Returns the shared-pattern solver when every row observes the same
/// columns, nullopt otherwise.
std::optional<SharedPatternSolver> shared_pattern_solve(const ObservationSet& obs,
                                                        const ColumnKernel& kernel,
                                                        const SolveOptions& opts);

/// Row-wise kernel regression with a shared column kernel. Rows with equal
/// observation patterns share one factorization. Observed entries are copied
/// into the output unchanged.
Eigen::MatrixXd complete_with_kernel(const ObservationSet& obs, const ColumnKernel& kernel,
                                     const SolveOptions& opts, CompletionReport* report = nullptr);

Eigen::MatrixXd complete_matrix(const ObservationSet& obs, const FeaturePrior& prior, int depth,
                                const Activation& act, const SolveOptions& opts,
                                CompletionReport* report = nullptr);

}  // namespace ntkmc
