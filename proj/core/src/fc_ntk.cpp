#include "ntkmc/fc_ntk.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "ntkmc/csv.hpp"
#include "ntkmc/errors.hpp"
#include "ntkmc/parallel.hpp"

namespace ntkmc {

FeaturePrior normalize_prior(const Eigen::MatrixXd& raw) {
  if (raw.cols() == 0 || raw.rows() == 0) throw ShapeError("feature prior is empty");
  FeaturePrior prior;
  prior.column_norms = raw.colwise().norm().transpose();
  prior.data = raw;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double norm = prior.column_norms(j);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      std::ostringstream msg;
      msg << "feature prior column " << j << " has norm " << norm << " and cannot be normalized";
      throw DomainError(msg.str());
    }
    prior.data.col(j) /= norm;
  }
  return prior;
}

Eigen::MatrixXd augment_identity(const Eigen::MatrixXd& raw, double s) {
  Eigen::MatrixXd out(raw.rows() + raw.cols(), raw.cols());
  out.topRows(raw.rows()) = raw;
  out.bottomRows(raw.cols()) = s * Eigen::MatrixXd::Identity(raw.cols(), raw.cols());
  return out;
}

ObservationSet::ObservationSet(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) throw ShapeError("observation shape must be positive");
}

void ObservationSet::add(Eigen::Index row, Eigen::Index col, double value) {
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_) {
    std::ostringstream msg;
    msg << "observation (" << row << ", " << col << ") outside a " << rows_ << " x " << cols_ << " matrix";
    throw IndexError(msg.str());
  }
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "observation (" << row << ", " << col << ") is not finite";
    throw DomainError(msg.str());
  }
  if (!seen_.insert(row * cols_ + col).second) {
    std::ostringstream msg;
    msg << "duplicate observation (" << row << ", " << col << ")";
    throw FormatError(msg.str());
  }
  entries_.push_back({row, col, value});
}

std::vector<std::vector<Eigen::Index>> ObservationSet::columns_by_row() const {
  std::vector<std::vector<std::pair<Eigen::Index, double>>> grouped(static_cast<std::size_t>(rows_));
  for (const auto& e : entries_) grouped[static_cast<std::size_t>(e.row)].emplace_back(e.col, e.value);
  std::vector<std::vector<Eigen::Index>> out(grouped.size());
  for (std::size_t r = 0; r < grouped.size(); ++r) {
    std::sort(grouped[r].begin(), grouped[r].end());
    for (const auto& [c, v] : grouped[r]) out[r].push_back(c);
  }
  return out;
}

std::vector<std::vector<double>> ObservationSet::values_by_row() const {
  std::vector<std::vector<std::pair<Eigen::Index, double>>> grouped(static_cast<std::size_t>(rows_));
  for (const auto& e : entries_) grouped[static_cast<std::size_t>(e.row)].emplace_back(e.col, e.value);
  std::vector<std::vector<double>> out(grouped.size());
  for (std::size_t r = 0; r < grouped.size(); ++r) {
    std::sort(grouped[r].begin(), grouped[r].end());
    for (const auto& [c, v] : grouped[r]) out[r].push_back(v);
  }
  return out;
}

ObservationSet ObservationSet::from_dense(const Eigen::MatrixXd& matrix) {
  ObservationSet obs(matrix.rows(), matrix.cols());
  for (Eigen::Index i = 0; i < matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < matrix.cols(); ++j)
      if (!std::isnan(matrix(i, j))) obs.add(i, j, matrix(i, j));
  return obs;
}

ObservationSet ObservationSet::from_triples_csv(const std::string& path, Eigen::Index rows,
                                                Eigen::Index cols) {
  const auto records = read_csv(path);
  if (records.empty()) throw FormatError("'" + path + "' is empty");
  struct Triple {
    long long r, c;
    double v;
    std::size_t line;
  };
  std::vector<Triple> triples;
  long long max_r = -1, max_c = -1;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& rec = records[k];
    if (rec.fields.size() != 3) {
      std::ostringstream msg;
      msg << path << ": line " << rec.line << " has " << rec.fields.size() << " fields, expected row,col,value";
      throw FormatError(msg.str());
    }
    const double r = parse_number(rec.fields[0], rec.line);
    const double c = parse_number(rec.fields[1], rec.line);
    if (r < 0 || c < 0 || r != std::floor(r) || c != std::floor(c))
      throw FormatError(path + ": line " + std::to_string(rec.line) + ": indices must be nonnegative integers");
    triples.push_back({static_cast<long long>(r), static_cast<long long>(c), parse_number(rec.fields[2], rec.line),
                       rec.line});
    max_r = std::max(max_r, triples.back().r);
    max_c = std::max(max_c, triples.back().c);
  }
  if (rows <= 0) rows = max_r + 1;
  if (cols <= 0) cols = max_c + 1;
  if (rows <= 0 || cols <= 0) throw FormatError("'" + path + "' has no observations");
  ObservationSet obs(rows, cols);
  for (const auto& t : triples) obs.add(t.r, t.c, t.v);
  return obs;
}

Eigen::MatrixXd ObservationSet::to_dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(rows_, cols_, std::numeric_limits<double>::quiet_NaN());
  for (const auto& e : entries_) out(e.row, e.col) = e.value;
  return out;
}

std::vector<Observation> row_major(const ObservationSet& obs) {
  std::vector<Observation> out = obs.entries();
  std::sort(out.begin(), out.end(),
            [](const Observation& a, const Observation& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
  return out;
}

Eigen::MatrixXd observation_kernel(const ObservationSet& obs, const ColumnKernel& kernel) {
  if (kernel.matrix.rows() != obs.cols()) throw ShapeError("column kernel size differs from the matrix width");
  const auto e = row_major(obs);
  const auto n = static_cast<Eigen::Index>(e.size());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      if (e[a].row == e[b].row) k(a, b) = kernel.matrix(e[a].col, e[b].col);
  return k;
}

Eigen::VectorXd observation_cross(const ObservationSet& obs, const ColumnKernel& kernel, Eigen::Index i,
                                  Eigen::Index j) {
  if (kernel.matrix.rows() != obs.cols()) throw ShapeError("column kernel size differs from the matrix width");
  if (i < 0 || i >= obs.rows() || j < 0 || j >= obs.cols()) throw IndexError("entry outside the matrix");
  const auto e = row_major(obs);
  Eigen::VectorXd k = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(e.size()));
  for (std::size_t a = 0; a < e.size(); ++a)
    if (e[a].row == i) k(static_cast<Eigen::Index>(a)) = kernel.matrix(e[a].col, j);
  return k;
}

ColumnKernel column_kernel(const FeaturePrior& prior, int depth, const Activation& act) {
  if (depth < 1) throw DomainError("depth must be at least 1");
  const Eigen::MatrixXd gram = prior.data.transpose() * prior.data;
  const Eigen::Index n = gram.rows();
  ColumnKernel kernel{Eigen::MatrixXd(n, n), depth, act};
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    for (auto j = static_cast<Eigen::Index>(begin); j < static_cast<Eigen::Index>(end); ++j)
      for (Eigen::Index k = 0; k <= j; ++k) kernel.matrix(j, k) = kappa(act, depth, gram(j, k));
  }, 16);
  kernel.matrix.triangularView<Eigen::StrictlyUpper>() = kernel.matrix.transpose();
  return kernel;
}

namespace {

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows,
                          const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = m(rows[a], cols[b]);
  return out;
}

std::vector<Eigen::Index> all_indices(Eigen::Index n) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

}  // namespace

SharedPatternSolver::SharedPatternSolver(const ColumnKernel& kernel, std::vector<Eigen::Index> columns,
                                         const SolveOptions& opts)
    : columns_(std::move(columns)),
      cross_(submatrix(kernel.matrix, columns_, all_indices(kernel.matrix.cols()))),
      solver_(submatrix(kernel.matrix, columns_, columns_), opts) {}

Eigen::MatrixXd SharedPatternSolver::predict(const Eigen::MatrixXd& values) const {
  return ntkmc::predict(solver_.solve(values), cross_, solver_.kernel_scale());
}

std::optional<SharedPatternSolver> shared_pattern_solve(const ObservationSet& obs, const ColumnKernel& kernel,
                                                        const SolveOptions& opts) {
  const auto patterns = obs.columns_by_row();
  for (const auto& p : patterns)
    if (p != patterns.front()) return std::nullopt;
  if (patterns.front().empty()) throw ShapeError("row 0 has no observations");
  return SharedPatternSolver(kernel, patterns.front(), opts);
}

Eigen::MatrixXd complete_with_kernel(const ObservationSet& obs, const ColumnKernel& kernel,
                                     const SolveOptions& opts, CompletionReport* report) {
  if (kernel.matrix.rows() != obs.cols()) {
    std::ostringstream msg;
    msg << "column kernel is " << kernel.matrix.rows() << " x " << kernel.matrix.cols() << " but the matrix has "
        << obs.cols() << " columns";
    throw ShapeError(msg.str());
  }
  const auto patterns = obs.columns_by_row();
  const auto values = obs.values_by_row();
  std::map<std::vector<Eigen::Index>, std::vector<Eigen::Index>> groups;
  for (std::size_t r = 0; r < patterns.size(); ++r) {
    if (patterns[r].empty()) throw ShapeError("row " + std::to_string(r) + " has no observations");
    groups[patterns[r]].push_back(static_cast<Eigen::Index>(r));
  }

  CompletionReport local;
  local.factorizations = groups.size();
  local.shared_pattern = groups.size() == 1;
  Eigen::MatrixXd out(obs.rows(), obs.cols());
  const auto every_column = all_indices(obs.cols());
  for (const auto& [cols, rows] : groups) {
    Eigen::MatrixXd rhs(static_cast<Eigen::Index>(cols.size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& v = values[static_cast<std::size_t>(rows[k])];
      for (std::size_t a = 0; a < v.size(); ++a)
        rhs(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) = v[a];
    }
    const Eigen::MatrixXd block = submatrix(kernel.matrix, cols, cols);
    Eigen::MatrixXd coeffs;
    if (opts.mode == SolveOptions::Mode::Direct) {
      DirectSolver solver(block, opts);
      local.ridge = solver.ridge();
      coeffs = solver.solve(rhs);
    } else {
      const DenseKernelOperator op(block);
      auto result = iterative_solve(op, rhs, opts);
      local.max_residual = std::max(local.max_residual, result.report.residuals.back());
      local.ridge = opts.ridge.amount(opts.kernel_scale * block.trace(), block.rows());
      coeffs = std::move(result.coefficients);
    }
    const Eigen::MatrixXd pred = predict(coeffs, submatrix(kernel.matrix, cols, every_column), opts.kernel_scale);
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(rows[k]) = pred.col(static_cast<Eigen::Index>(k)).transpose();
  }
  for (const auto& e : obs.entries()) out(e.row, e.col) = e.value;
  if (report) *report = local;
  return out;
}

Eigen::MatrixXd complete_matrix(const ObservationSet& obs, const FeaturePrior& prior, int depth,
                                const Activation& act, const SolveOptions& opts, CompletionReport* report) {
  if (prior.size() != obs.cols()) {
    std::ostringstream msg;
    msg << "prior has " << prior.size() << " columns but the matrix has " << obs.cols();
    throw ShapeError(msg.str());
  }
  return complete_with_kernel(obs, column_kernel(prior, depth, act), opts, report);
}

}  // namespace ntkmc
