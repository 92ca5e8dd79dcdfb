#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ntkmc/fc_ntk.hpp"

namespace ntkmc {

/// Channel image prior for the convolutional kernel: either explicit
/// channels or the infinite-channel stationary form where pixel inner
/// products are 1 on the diagonal and `rho` elsewhere.
class ImagePrior {
 public:
  /// channels x (rows * cols), pixel (i, j) in column i * cols + j.
  static ImagePrior from_channels(Eigen::MatrixXd channels, Eigen::Index rows, Eigen::Index cols);
  /// Throws DomainError unless 0 <= rho < 1.
  static ImagePrior analytic(double rho, Eigen::Index rows, Eigen::Index cols);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  bool is_analytic() const { return rho_.has_value(); }
  /// Only valid for analytic priors.
  double rho() const;
  /// Only valid for explicit priors.
  const Eigen::MatrixXd& channels() const;
  Eigen::Index channel_count() const { return channels_.rows(); }

  /// Same analytic prior at another resolution; UnsupportedError for
  /// explicit priors.
  ImagePrior resized(Eigen::Index rows, Eigen::Index cols) const;

  /// rows*cols x rows*cols matrix of channel-wise pixel inner products.
  Eigen::MatrixXd pixel_gram() const;

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::optional<double> rho_;
  Eigen::MatrixXd channels_;
};

/// n x n identity as a column prior (one-hot encoding).
FeaturePrior identity_prior(Eigen::Index n);

/// Single-channel image holding the rows x cols identity matrix. Windows
/// that miss the diagonal are all zero, so building a CNTK from it needs
/// BuildOptions::allow_degenerate.
ImagePrior identity_image_prior(Eigen::Index rows, Eigen::Index cols);

/// One-hot-per-pixel prior (rows * cols channels). Its inner products are
/// exactly the analytic form with rho = 0, which is what this returns.
ImagePrior one_hot_image_prior(Eigen::Index rows, Eigen::Index cols);

/// I.i.d. U[0, high] entries. Each channel has its own engine seeded from
/// (seed, channel), so the tensor is reproducible and independent of
/// evaluation order.
ImagePrior uniform_random_prior(Eigen::Index channels, Eigen::Index rows, Eigen::Index cols, double high,
                                std::uint64_t seed);

/// Infinite-channel limit of the uniform prior: rho = E[z]^2 / E[z^2] = 3/4.
inline constexpr double kUniformPriorRho = 0.75;
ImagePrior analytic_uniform_prior(Eigen::Index rows, Eigen::Index cols, double rho = kUniformPriorRho);

/// Two channels: i / (rows - 1) and j / (cols - 1).
ImagePrior meshgrid_prior(Eigen::Index rows, Eigen::Index cols);

/// Image prior from a short text spec:
///   analytic[:rho]           infinite-channel prior, rho defaults to 3/4
///   uniform:<c>[:<high>]     c explicit U[0, high] channels (high 0.1)
///   identity | one-hot | meshgrid
/// Malformed specs are DomainError.
ImagePrior image_prior_from_spec(const std::string& spec, Eigen::Index rows, Eigen::Index cols,
                                 std::uint64_t seed = 0);

/// Keyed embedding vectors loaded from CSV (key, v1, v2, ...). A row keyed
/// "*" is the fallback for unknown keys.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> keys, Eigen::MatrixXd vectors);

  static EmbeddingTable from_csv(const std::string& path);

  Eigen::Index dim() const { return vectors_.rows(); }
  std::size_t size() const { return keys_.size(); }
  const std::vector<std::string>& keys() const { return keys_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }

  bool has_default() const { return default_.has_value(); }
  /// Vector for `key`, the default vector if the key is unknown, or nullopt.
  std::optional<Eigen::VectorXd> lookup(const std::string& key) const;

 private:
  std::vector<std::string> keys_;
  Eigen::MatrixXd vectors_;
  std::map<std::string, Eigen::Index> index_;
  std::optional<Eigen::Index> default_;
};

/// For each (drug, cell) pair: the cell vector rescaled to the drug
/// vector's norm times `cell_scale`, stacked below the drug vector, then the
/// whole column unit-normalized.
FeaturePrior reference_prior(const EmbeddingTable& drugs, const EmbeddingTable& cells,
                             const std::vector<std::pair<std::string, std::string>>& pairs,
                             double cell_scale = 1.25);

/// Dense CSV output of another method (p x n) used as the prior,
/// optionally with s * I stacked below before normalization.
FeaturePrior method_output_prior(const std::string& path, std::optional<double> identity_scale = std::nullopt);

}  // namespace ntkmc
