#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "ntkmc/arch.hpp"
#include "ntkmc/cntk.hpp"
#include "ntkmc/priors.hpp"

namespace ntkmc {

/// Rows rotated down by i and columns right by j (both taken mod the size):
/// out(r, c) = a((r - i) mod rows, (c - j) mod cols).
Eigen::MatrixXd rotate(const Eigen::MatrixXd& a, Eigen::Index i, Eigen::Index j);

/// Embeds a in the top-left corner of a d2 x d2 matrix filled with min(a).
Eigen::MatrixXd min_pad(const Eigen::MatrixXd& a, Eigen::Index d2);

/// High-resolution kernel stored as one d2 x d2 row per residue class
/// (i mod p, j mod p), p = 2^s. Holds p^2 d2^2 numbers instead of d2^4.
class CompactKernel {
 public:
  CompactKernel(int s, Eigen::Index d2);

  int s() const { return s_; }
  Eigen::Index period() const { return p_; }
  Eigen::Index size() const { return d2_; }
  Eigen::Index base_size() const { return 2 * p_; }
  /// Number of stored doubles.
  std::size_t entries() const { return data_.size(); }

  /// Stored row for residue class (a, b), a, b < period().
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> row(Eigen::Index a,
                                                                                                 Eigen::Index b) const;
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> row(Eigen::Index a,
                                                                                           Eigen::Index b);

  /// K(i, j, i2, j2) at resolution size() without materializing K.
  double query(Eigen::Index i, Eigen::Index j, Eigen::Index i2, Eigen::Index j2) const;

  /// Row-major payload (a, b, r, c).
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  std::array<std::uint8_t, 32> arch_hash{};
  double rho = 0.0;

 private:
  int s_;
  Eigen::Index p_;
  Eigen::Index d2_;
  std::vector<double> data_;
};

/// Expands the kernel of a network with s stride-2 downsamples and s
/// nearest upsamples, built at base resolution 2^(s+1) from an analytic
/// prior, to resolution d2 = 2^p2 with p2 > s + 1.
CompactKernel expand_kernel(const PixelKernel& base, int s, Eigen::Index d2);

/// Checks the expansion hypotheses (nearest upsampling only, downsamples
/// before upsamples, equal counts, analytic prior), builds the base kernel
/// and expands it. Violations throw UnsupportedError.
CompactKernel expand_kernel(const ArchSpec& arch, const ImagePrior& prior, Eigen::Index d2);

/// Throws UnsupportedError explaining the first expansion hypothesis the
/// arch or prior violates.
void check_expandable(const ArchSpec& arch, const ImagePrior& prior);

using Pixel = std::pair<Eigen::Index, Eigen::Index>;

/// Uniform read access to a full or compact kernel.
class KernelSource {
 public:
  virtual ~KernelSource() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual double at(Eigen::Index i, Eigen::Index j, Eigen::Index i2, Eigen::Index j2) const = 0;

  /// |a| x |b| block of kernel values; rows fill in parallel.
  Eigen::MatrixXd gram(const std::vector<Pixel>& a, const std::vector<Pixel>& b) const;
};

class FullKernelSource final : public KernelSource {
 public:
  /// Non-owning; the kernel must outlive the source.
  explicit FullKernelSource(const PixelKernel& k) : k_(k) {}
  Eigen::Index rows() const override { return k_.rows; }
  Eigen::Index cols() const override { return k_.cols; }
  double at(Eigen::Index i, Eigen::Index j, Eigen::Index i2, Eigen::Index j2) const override {
    return k_(i, j, i2, j2);
  }

 private:
  const PixelKernel& k_;
};

class CompactKernelSource final : public KernelSource {
 public:
  /// Non-owning; the kernel must outlive the source.
  explicit CompactKernelSource(const CompactKernel& k) : k_(k) {}
  Eigen::Index rows() const override { return k_.size(); }
  Eigen::Index cols() const override { return k_.size(); }
  double at(Eigen::Index i, Eigen::Index j, Eigen::Index i2, Eigen::Index j2) const override {
    return k_.query(i, j, i2, j2);
  }

 private:
  const CompactKernel& k_;
};

/// Kernel values between two coordinate lists, straight from the compact
/// store.
Eigen::MatrixXd materialize_gram(const CompactKernel& ck, const std::vector<Pixel>& a, const std::vector<Pixel>& b);

}  // namespace ntkmc
