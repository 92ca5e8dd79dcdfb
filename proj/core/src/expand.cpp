#include "ntkmc/expand.hpp"

#include <sstream>

#include "ntkmc/errors.hpp"
#include "ntkmc/parallel.hpp"

namespace ntkmc {

namespace {

Eigen::Index wrap(Eigen::Index x, Eigen::Index n) {
  const Eigen::Index r = x % n;
  return r < 0 ? r + n : r;
}

bool power_of_two(Eigen::Index x) { return x > 0 && (x & (x - 1)) == 0; }

}  // namespace

Eigen::MatrixXd rotate(const Eigen::MatrixXd& a, Eigen::Index i, Eigen::Index j) {
  Eigen::MatrixXd out(a.rows(), a.cols());
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = 0; r < a.rows(); ++r) out(r, c) = a(wrap(r - i, a.rows()), wrap(c - j, a.cols()));
  return out;
}

Eigen::MatrixXd min_pad(const Eigen::MatrixXd& a, Eigen::Index d2) {
  if (a.rows() != a.cols()) throw ShapeError("min_pad expects a square matrix");
  if (d2 < a.rows()) {
    std::ostringstream msg;
    msg << "cannot pad a " << a.rows() << " x " << a.cols() << " matrix down to " << d2 << " x " << d2;
    throw ShapeError(msg.str());
  }
  if (a.size() == 0) throw ShapeError("min_pad of an empty matrix");
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(d2, d2, a.minCoeff());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  return out;
}

CompactKernel::CompactKernel(int s, Eigen::Index d2) : s_(s), p_(Eigen::Index{1} << s), d2_(d2) {
  if (s < 0 || s > 20) throw DomainError("s must lie in [0, 20]");
  if (!power_of_two(d2) || d2 <= 2 * p_) {
    std::ostringstream msg;
    msg << "expanded size must be a power of two above the base size " << 2 * p_ << ", got " << d2;
    throw ShapeError(msg.str());
  }
  data_.assign(static_cast<std::size_t>(p_ * p_ * d2_ * d2_), 0.0);
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> CompactKernel::row(
    Eigen::Index a, Eigen::Index b) const {
  if (a < 0 || a >= p_ || b < 0 || b >= p_) throw IndexError("residue class outside the compact store");
  return {data_.data() + (a * p_ + b) * d2_ * d2_, d2_, d2_};
}

Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> CompactKernel::row(Eigen::Index a,
                                                                                                       Eigen::Index b) {
  if (a < 0 || a >= p_ || b < 0 || b >= p_) throw IndexError("residue class outside the compact store");
  return {data_.data() + (a * p_ + b) * d2_ * d2_, d2_, d2_};
}

double CompactKernel::query(Eigen::Index i, Eigen::Index j, Eigen::Index i2, Eigen::Index j2) const {
  if (i < 0 || j < 0 || i2 < 0 || j2 < 0 || i >= d2_ || j >= d2_ || i2 >= d2_ || j2 >= d2_) {
    std::ostringstream msg;
    msg << "kernel index (" << i << ", " << j << ", " << i2 << ", " << j2 << ") outside resolution " << d2_;
    throw IndexError(msg.str());
  }
  const Eigen::Index a = i % p_, b = j % p_;
  // K(i, j, :, :) is the stored row of its residue class rotated by
  // (i - a, j - b).
  const Eigen::Index r = wrap(i2 - (i - a), d2_), c = wrap(j2 - (j - b), d2_);
  return data_[static_cast<std::size_t>(((a * p_ + b) * d2_ + r) * d2_ + c)];
}

CompactKernel expand_kernel(const PixelKernel& base, int s, Eigen::Index d2) {
  const Eigen::Index p = Eigen::Index{1} << s;
  const Eigen::Index n = 2 * p;
  if (base.rows != n || base.cols != n) {
    std::ostringstream msg;
    msg << "expansion with s = " << s << " needs a " << n << " x " << n << " base kernel, got " << base.rows << " x "
        << base.cols;
    throw ShapeError(msg.str());
  }
  CompactKernel out(s, d2);
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = 0; b < p; ++b) {
      const Eigen::MatrixXd centered = rotate(kernel_row(base, a, b), p - a, p - b);
      out.row(a, b) = rotate(min_pad(centered, d2), a - p, b - p);
    }
  return out;
}

void check_expandable(const ArchSpec& arch, const ImagePrior& prior) {
  if (arch.has_bilinear()) throw UnsupportedError("kernel expansion does not support bilinear upsampling");
  if (!prior.is_analytic())
    throw UnsupportedError("kernel expansion needs an analytic (infinite-channel stationary) prior");
  if (arch.downsample_count() != arch.upsample_count()) {
    std::ostringstream msg;
    msg << "kernel expansion needs equal numbers of downsamples and upsamples, got " << arch.downsample_count()
        << " and " << arch.upsample_count();
    throw UnsupportedError(msg.str());
  }
  if (!arch.downs_before_ups())
    throw UnsupportedError("kernel expansion needs every downsample to precede every upsample");
}

CompactKernel expand_kernel(const ArchSpec& arch, const ImagePrior& prior, Eigen::Index d2) {
  check_expandable(arch, prior);
  const int s = arch.downsample_count();
  const Eigen::Index n = Eigen::Index{2} << s;
  const ArchSpec base_arch = arch.with_input(n, n);
  const PixelKernel base = build_cntk(base_arch, prior.resized(n, n));
  CompactKernel out = expand_kernel(base, s, d2);
  out.arch_hash = arch.hash();
  out.rho = prior.rho();
  return out;
}

Eigen::MatrixXd KernelSource::gram(const std::vector<Pixel>& a, const std::vector<Pixel>& b) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  const Eigen::Index m = rows(), n = cols();
  auto check = [&](const Pixel& px) {
    if (px.first < 0 || px.first >= m || px.second < 0 || px.second >= n) {
      std::ostringstream msg;
      msg << "pixel (" << px.first << ", " << px.second << ") outside a " << m << " x " << n << " kernel";
      throw IndexError(msg.str());
    }
  };
  for (const auto& px : a) check(px);
  for (const auto& px : b) check(px);
  parallel_for(b.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c)
      for (std::size_t r = 0; r < a.size(); ++r)
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            at(a[r].first, a[r].second, b[c].first, b[c].second);
  }, 16);
  return out;
}

Eigen::MatrixXd materialize_gram(const CompactKernel& ck, const std::vector<Pixel>& a, const std::vector<Pixel>& b) {
  return CompactKernelSource(ck).gram(a, b);
}

}  // namespace ntkmc
