#include "ntkmc/inpaint.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ntkmc/cntk.hpp"
#include "ntkmc/errors.hpp"
#include "ntkmc/parallel.hpp"

namespace ntkmc {

namespace {

// Largest observed set whose Gram matrix is materialized for the
// iterative solver (~3.2 GB of doubles).
constexpr Eigen::Index kDenseGramLimit = 20000;

}  // namespace

void MaskedImage::validate(bool allow_complete) const {
  if (image.channels() < 1) throw ShapeError("image has no channels");
  for (const auto& p : image.planes) {
    if (p.rows() != mask.rows() || p.cols() != mask.cols()) {
      std::ostringstream msg;
      msg << "image is " << p.rows() << " x " << p.cols() << " but the mask is " << mask.rows() << " x "
          << mask.cols();
      throw ShapeError(msg.str());
    }
    if (!p.allFinite()) throw DomainError("image contains non-finite values");
  }
  const auto observed = mask.count();
  if (observed == 0) throw DomainError("mask has no observed pixels");
  if (!allow_complete && observed == mask.size()) throw DomainError("mask has no missing pixels");
}

Image mean_fill(const MaskedImage& input) {
  input.validate(true);
  Image out = input.image;
  for (auto& plane : out.planes) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < plane.size(); ++k)
      if (input.mask(k)) sum += plane(k);
    const double mean = sum / static_cast<double>(input.mask.count());
    for (Eigen::Index k = 0; k < plane.size(); ++k)
      if (!input.mask(k)) plane(k) = mean;
  }
  return out;
}

GramOperator::GramOperator(const KernelSource& kernel, std::vector<Pixel> coords, Eigen::Index block)
    : kernel_(kernel), coords_(std::move(coords)), block_(std::max<Eigen::Index>(block, 1)) {}

Eigen::MatrixXd GramOperator::apply(const Eigen::MatrixXd& x) const {
  const Eigen::Index n = size();
  Eigen::MatrixXd out(n, x.cols());
  const auto blocks = static_cast<std::size_t>((n + block_ - 1) / block_);
  parallel_for(blocks, [&](std::size_t begin, std::size_t end) {
    Eigen::MatrixXd rows;
    for (std::size_t b = begin; b < end; ++b) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(b) * block_;
      const Eigen::Index len = std::min(block_, n - r0);
      rows.resize(len, n);
      for (Eigen::Index c = 0; c < n; ++c) {
        const auto& pc = coords_[static_cast<std::size_t>(c)];
        for (Eigen::Index r = 0; r < len; ++r) {
          const auto& pr = coords_[static_cast<std::size_t>(r0 + r)];
          rows(r, c) = kernel_.at(pr.first, pr.second, pc.first, pc.second);
        }
      }
      out.middleRows(r0, len) = rows * x;
    }
  }, 1);
  return out;
}

Eigen::MatrixXd GramOperator::columns(const std::vector<Eigen::Index>& cols) const {
  std::vector<Pixel> picked;
  picked.reserve(cols.size());
  for (auto c : cols) picked.push_back(coords_[static_cast<std::size_t>(c)]);
  return kernel_.gram(coords_, picked);
}

double GramOperator::trace() const {
  double t = 0.0;
  for (const auto& p : coords_) t += kernel_.at(p.first, p.second, p.first, p.second);
  return t;
}

Image inpaint(const MaskedImage& input, const KernelSource& kernel, const SolveOptions& opts, InpaintReport* report) {
  input.validate(true);
  opts.validate();
  if (kernel.rows() != input.mask.rows() || kernel.cols() != input.mask.cols()) {
    std::ostringstream msg;
    msg << "kernel resolution " << kernel.rows() << " x " << kernel.cols() << " does not match image "
        << input.mask.rows() << " x " << input.mask.cols();
    throw ShapeError(msg.str());
  }
  std::vector<Pixel> seen, unseen;
  for (Eigen::Index i = 0; i < input.mask.rows(); ++i)
    for (Eigen::Index j = 0; j < input.mask.cols(); ++j) (input.mask(i, j) ? seen : unseen).emplace_back(i, j);

  InpaintReport local;
  local.observed = static_cast<Eigen::Index>(seen.size());
  local.missing = static_cast<Eigen::Index>(unseen.size());
  Image out = input.image;
  if (unseen.empty()) {
    if (report) *report = local;
    return out;
  }

  const auto n = static_cast<Eigen::Index>(seen.size());
  Eigen::MatrixXd rhs(n, input.image.channels());
  for (int c = 0; c < input.image.channels(); ++c)
    for (Eigen::Index k = 0; k < n; ++k)
      rhs(k, c) = input.image.planes[static_cast<std::size_t>(c)](seen[static_cast<std::size_t>(k)].first,
                                                                  seen[static_cast<std::size_t>(k)].second);
  const Eigen::MatrixXd cross = kernel.gram(seen, unseen);

  Eigen::MatrixXd coeffs;
  if (opts.mode == SolveOptions::Mode::Direct) {
    const DirectSolver solver(kernel.gram(seen, seen), opts);
    coeffs = solver.solve(rhs);
    local.ridge = solver.ridge();
    // Regression weights of every missing pixel on the observed ones.
    const Eigen::MatrixXd weights = opts.kernel_scale * solver.solve(cross);
    const Eigen::VectorXd sums = weights.colwise().sum().transpose();
    local.weight_sum_min = sums.minCoeff();
    local.weight_sum_max = sums.maxCoeff();
    local.weight_sum_mean = sums.mean();
  } else {
    local.used_iterative = true;
    IterativeResult result;
    if (n <= kDenseGramLimit) {
      const Eigen::MatrixXd gram = kernel.gram(seen, seen);
      result = iterative_solve(DenseKernelOperator(gram), rhs, opts);
    } else {
      result = iterative_solve(GramOperator(kernel, seen), rhs, opts);
    }
    coeffs = std::move(result.coefficients);
    local.iterative = std::move(result.report);
    local.ridge = 0.0;
  }

  const Eigen::MatrixXd pred = predict(coeffs, cross, opts.kernel_scale);
  for (int c = 0; c < input.image.channels(); ++c) {
    auto& plane = out.planes[static_cast<std::size_t>(c)];
    for (std::size_t u = 0; u < unseen.size(); ++u)
      plane(unseen[u].first, unseen[u].second) = std::clamp(pred(static_cast<Eigen::Index>(u), c), 0.0, 1.0);
  }
  if (report) *report = local;
  return out;
}

Eigen::MatrixXd kernel_row(const KernelSource& kernel, Eigen::Index i, Eigen::Index j) {
  if (i < 0 || i >= kernel.rows() || j < 0 || j >= kernel.cols()) {
    std::ostringstream msg;
    msg << "pixel (" << i << ", " << j << ") outside a " << kernel.rows() << " x " << kernel.cols() << " kernel";
    throw IndexError(msg.str());
  }
  Eigen::MatrixXd row(kernel.rows(), kernel.cols());
  for (Eigen::Index a = 0; a < kernel.rows(); ++a)
    for (Eigen::Index b = 0; b < kernel.cols(); ++b) row(a, b) = kernel.at(i, j, a, b);
  return row;
}

Image heatmap(const KernelSource& kernel, Eigen::Index i, Eigen::Index j, double pct) {
  return Image::gray(percentile_view(kernel_row(kernel, i, j), pct));
}

}  // namespace ntkmc
