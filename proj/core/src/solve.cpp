#include "ntkmc/solve.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "ntkmc/errors.hpp"

namespace ntkmc {

Ridge Ridge::parse(const std::string& text) {
  if (text == "none" || text.empty()) return none();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string kind = text.substr(0, colon);
    const std::string number = text.substr(colon + 1);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(number, &used);
      if (used != number.size()) throw std::invalid_argument(number);
    } catch (const std::logic_error&) {
      throw DomainError("bad ridge value in '" + text + "'");
    }
    if (!(value >= 0.0)) throw DomainError("ridge value must be nonnegative: '" + text + "'");
    if (kind == "abs") return absolute(value);
    if (kind == "trace") return trace_scaled(value);
  }
  throw DomainError("unknown ridge '" + text + "' (expected none, abs:<lambda>, trace:<c>)");
}

std::string Ridge::to_string() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind) {
    case Kind::None:
      return "none";
    case Kind::Absolute:
      out << "abs:" << value;
      break;
    case Kind::TraceScaled:
      out << "trace:" << value;
      break;
  }
  return out.str();
}

double Ridge::amount(double trace, Eigen::Index n) const {
  switch (kind) {
    case Kind::None:
      return 0.0;
    case Kind::Absolute:
      return value;
    case Kind::TraceScaled:
      return n > 0 ? value * trace / static_cast<double>(n) : 0.0;
  }
  return 0.0;
}

void SolveOptions::validate() const {
  if (!(kernel_scale > 0.0)) throw DomainError("kernel_scale must be positive");
  if (ridge.value < 0.0) throw DomainError("ridge must be nonnegative");
  if (epochs < 0) throw DomainError("epochs must be nonnegative");
  if (preconditioner_rank < 1) throw DomainError("preconditioner_rank must be positive");
  if (subsample < 1) throw DomainError("subsample must be positive");
}

namespace {

// Relative pivot below which a successful Cholesky is still treated as
// numerically singular.
constexpr double kPivotFloor = 1e-14;

std::string ridge_hint() {
  return "kernel system is singular; retry with a ridge, e.g. --ridge trace:4e-5";
}

}  // namespace

DirectSolver::DirectSolver(const Eigen::MatrixXd& kernel, const SolveOptions& opts)
    : n_(kernel.rows()), scale_(opts.kernel_scale) {
  opts.validate();
  if (kernel.rows() != kernel.cols()) throw ShapeError("kernel must be square");
  if (n_ > opts.direct_cap) {
    std::ostringstream msg;
    msg << "system of size " << n_ << " exceeds the direct-solve cap " << opts.direct_cap
        << "; use the iterative solver";
    throw UnsupportedError(msg.str());
  }
  Eigen::MatrixXd system = scale_ * kernel;
  ridge_ = opts.ridge.amount(system.trace(), n_);
  system.diagonal().array() += ridge_;
  if (n_ == 0) return;

  const double max_diag = system.diagonal().cwiseAbs().maxCoeff();
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() == Eigen::Success) {
    const Eigen::VectorXd pivots = llt.matrixLLT().diagonal();
    const double min_pivot_sq = pivots.cwiseAbs2().minCoeff();
    if (min_pivot_sq > kPivotFloor * max_diag * static_cast<double>(n_) || max_diag == 0.0) {
      if (max_diag == 0.0) throw NumericError(ridge_hint());
      llt_.emplace(std::move(llt));
      return;
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > kPivotFloor * static_cast<double>(n_))) {
    std::ostringstream msg;
    msg << ridge_hint();
    if (std::isfinite(rcond)) msg << " (reciprocal condition estimate " << rcond << ")";
    throw NumericError(msg.str());
  }
  lu_.emplace(std::move(lu));
}

Eigen::MatrixXd DirectSolver::solve(const Eigen::MatrixXd& rhs) const {
  if (rhs.rows() != n_) throw ShapeError("right-hand side has wrong number of rows");
  if (n_ == 0) return Eigen::MatrixXd(0, rhs.cols());
  if (llt_) return llt_->solve(rhs);
  return lu_->solve(rhs);
}

Eigen::MatrixXd direct_solve(const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& rhs,
                             const SolveOptions& opts) {
  return DirectSolver(kernel, opts).solve(rhs);
}

Eigen::MatrixXd DenseKernelOperator::apply(const Eigen::MatrixXd& x) const {
  return kernel_.selfadjointView<Eigen::Lower>() * x;
}

Eigen::MatrixXd DenseKernelOperator::columns(const std::vector<Eigen::Index>& cols) const {
  Eigen::MatrixXd out(kernel_.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = kernel_.col(cols[c]);
  return out;
}

namespace {

std::vector<Eigen::Index> sample_indices(Eigen::Index n, Eigen::Index s, std::uint64_t seed) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (s >= n) return idx;
  // Partial Fisher-Yates on raw engine output so the sample does not depend
  // on the standard library's distribution implementations.
  std::mt19937_64 engine(seed);
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto span = static_cast<std::uint64_t>(n - i);
    const auto j = i + static_cast<Eigen::Index>(engine() % span);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(s));
  std::sort(idx.begin(), idx.end());
  return idx;
}

double relative_residual(const Eigen::MatrixXd& residual, double rhs_norm) {
  return rhs_norm > 0.0 ? residual.norm() / rhs_norm : residual.norm();
}

}  // namespace

IterativeResult iterative_solve(const KernelOperator& kernel, const Eigen::MatrixXd& rhs,
                                const SolveOptions& opts) {
  opts.validate();
  const Eigen::Index n = kernel.size();
  if (rhs.rows() != n) throw ShapeError("right-hand side has wrong number of rows");

  IterativeResult result;
  result.coefficients = Eigen::MatrixXd::Zero(n, rhs.cols());
  auto& report = result.report;
  report.seed = opts.seed;
  const double rhs_norm = rhs.norm();
  report.residuals.push_back(rhs_norm > 0.0 ? 1.0 : 0.0);
  if (opts.epochs == 0 || n == 0) return result;

  const double scale = opts.kernel_scale;
  const double ridge = opts.ridge.amount(scale * kernel.trace(), n);

  // Preconditioner from a subsampled block of the scaled, ridged kernel.
  const Eigen::Index s = std::min<Eigen::Index>(n, opts.subsample);
  const auto sample = sample_indices(n, s, opts.seed);
  Eigen::MatrixXd cols = scale * kernel.columns(sample);
  Eigen::MatrixXd block(s, s);
  for (Eigen::Index a = 0; a < s; ++a) block.row(a) = cols.row(sample[static_cast<std::size_t>(a)]);
  block = 0.5 * (block + block.transpose()).eval();
  block.diagonal().array() += ridge;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition of the preconditioner block failed");
  // Descending order.
  const Eigen::VectorXd sigma = eig.eigenvalues().reverse();
  const Eigen::MatrixXd vecs = eig.eigenvectors().rowwise().reverse();

  int rank = static_cast<int>(std::min<Eigen::Index>(opts.preconditioner_rank, s - 1));
  rank = std::max(rank, 0);
  const double sample_ratio = static_cast<double>(n) / static_cast<double>(s);
  double tail = sigma(rank) * sample_ratio;
  if (!(tail > 0.0)) {
    // Rank-deficient block: fall back to the smallest positive eigenvalue.
    tail = 0.0;
    for (Eigen::Index i = rank; i >= 0; --i) {
      if (sigma(i) > 0.0) {
        rank = static_cast<int>(i);
        tail = sigma(i) * sample_ratio;
        break;
      }
    }
    if (!(tail > 0.0)) throw NumericError("kernel block has no positive eigenvalues");
  }

  Eigen::MatrixXd basis;
  Eigen::VectorXd lambdas = sigma.head(rank) * sample_ratio;
  if (s == n) {
    basis = Eigen::MatrixXd::Zero(n, rank);
    for (Eigen::Index a = 0; a < s; ++a) basis.row(sample[static_cast<std::size_t>(a)]) = vecs.row(a).head(rank);
  } else {
    // Nystrom extension of the sample eigenvectors, then re-orthonormalize.
    Eigen::MatrixXd extended = cols * vecs.leftCols(rank);
    for (int i = 0; i < rank; ++i) extended.col(i) /= sigma(i);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(extended);
    basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);
  }
  const double damping = (s == n) ? 1.0 : 0.5;
  report.rank = rank;
  report.subsample = s;
  report.tail_eigenvalue = tail;
  report.step = damping / tail;

  Eigen::VectorXd shrink(rank);
  for (int i = 0; i < rank; ++i) shrink(i) = 1.0 - tail / lambdas(i);

  auto apply_system = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd y = scale * kernel.apply(x);
    if (ridge != 0.0) y += ridge * x;
    return y;
  };
  auto precondition = [&](const Eigen::MatrixXd& r) -> Eigen::MatrixXd {
    if (rank == 0) return r;
    return r - basis * (shrink.asDiagonal() * (basis.transpose() * r));
  };

  Eigen::MatrixXd residual = rhs;
  double previous = report.residuals.back();
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    const Eigen::MatrixXd direction = report.step * precondition(residual);
    result.coefficients += direction;
    residual -= apply_system(direction);
    const double current = relative_residual(residual, rhs_norm);
    report.residuals.push_back(current);
    if (!std::isfinite(current) || (previous > 0.0 && current > 10.0 * previous)) {
      std::ostringstream msg;
      msg << "iterative solver diverged at epoch " << epoch + 1 << " (residual " << previous << " -> "
          << current << "); retry with a smaller --kernel-scale";
      throw NumericError(msg.str());
    }
    previous = current;
  }
  return result;
}

Eigen::MatrixXd predict(const Eigen::MatrixXd& coefficients, const Eigen::MatrixXd& cross_kernel,
                        double kernel_scale) {
  if (cross_kernel.rows() != coefficients.rows()) {
    std::ostringstream msg;
    msg << "cross kernel has " << cross_kernel.rows() << " rows but there are " << coefficients.rows()
        << " coefficients";
    throw ShapeError(msg.str());
  }
  return kernel_scale * (cross_kernel.transpose() * coefficients);
}

}  // namespace ntkmc
