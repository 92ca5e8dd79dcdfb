#include "ntkmc/priors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ntkmc/csv.hpp"
#include "ntkmc/errors.hpp"

namespace ntkmc {

namespace {

void check_dims(Eigen::Index rows, Eigen::Index cols) {
  if (rows <= 0 || cols <= 0) throw ShapeError("image prior dimensions must be positive");
}

// splitmix64 finalizer; decorrelates per-channel seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ImagePrior ImagePrior::from_channels(Eigen::MatrixXd channels, Eigen::Index rows, Eigen::Index cols) {
  check_dims(rows, cols);
  if (channels.rows() < 1) throw ShapeError("explicit image prior needs at least one channel");
  if (channels.cols() != rows * cols) {
    std::ostringstream msg;
    msg << "prior has " << channels.cols() << " pixels per channel, expected " << rows << " x " << cols;
    throw ShapeError(msg.str());
  }
  if (!channels.allFinite()) throw DomainError("image prior contains non-finite values");
  ImagePrior p;
  p.rows_ = rows;
  p.cols_ = cols;
  p.channels_ = std::move(channels);
  return p;
}

ImagePrior ImagePrior::analytic(double rho, Eigen::Index rows, Eigen::Index cols) {
  check_dims(rows, cols);
  if (!(rho >= 0.0 && rho < 1.0)) {
    std::ostringstream msg;
    msg << "analytic prior needs 0 <= rho < 1, got " << rho;
    throw DomainError(msg.str());
  }
  ImagePrior p;
  p.rows_ = rows;
  p.cols_ = cols;
  p.rho_ = rho;
  return p;
}

double ImagePrior::rho() const {
  if (!rho_) throw UnsupportedError("explicit image prior has no rho");
  return *rho_;
}

const Eigen::MatrixXd& ImagePrior::channels() const {
  if (rho_) throw UnsupportedError("analytic image prior has no explicit channels");
  return channels_;
}

ImagePrior ImagePrior::resized(Eigen::Index rows, Eigen::Index cols) const {
  if (!rho_) throw UnsupportedError("only analytic priors can change resolution");
  return analytic(*rho_, rows, cols);
}

Eigen::MatrixXd ImagePrior::pixel_gram() const {
  const Eigen::Index n = rows_ * cols_;
  if (rho_) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Constant(n, n, *rho_);
    g.diagonal().setOnes();
    return g;
  }
  return channels_.transpose() * channels_;
}

FeaturePrior identity_prior(Eigen::Index n) {
  if (n <= 0) throw ShapeError("identity prior size must be positive");
  return normalize_prior(Eigen::MatrixXd::Identity(n, n));
}

ImagePrior identity_image_prior(Eigen::Index rows, Eigen::Index cols) {
  check_dims(rows, cols);
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, rows * cols);
  for (Eigen::Index i = 0; i < std::min(rows, cols); ++i) z(0, i * cols + i) = 1.0;
  return ImagePrior::from_channels(std::move(z), rows, cols);
}

ImagePrior one_hot_image_prior(Eigen::Index rows, Eigen::Index cols) { return ImagePrior::analytic(0.0, rows, cols); }

ImagePrior uniform_random_prior(Eigen::Index channels, Eigen::Index rows, Eigen::Index cols, double high,
                                std::uint64_t seed) {
  if (channels <= 0) throw ShapeError("channel count must be positive");
  if (!(high > 0.0)) throw DomainError("uniform prior upper bound must be positive");
  check_dims(rows, cols);
  Eigen::MatrixXd z(channels, rows * cols);
  constexpr double kUnit = 1.0 / 9007199254740992.0;  // 2^-53
  for (Eigen::Index c = 0; c < channels; ++c) {
    std::mt19937_64 engine(mix(seed ^ mix(static_cast<std::uint64_t>(c))));
    for (Eigen::Index p = 0; p < rows * cols; ++p) z(c, p) = static_cast<double>(engine() >> 11) * kUnit * high;
  }
  return ImagePrior::from_channels(std::move(z), rows, cols);
}

ImagePrior analytic_uniform_prior(Eigen::Index rows, Eigen::Index cols, double rho) {
  return ImagePrior::analytic(rho, rows, cols);
}

ImagePrior image_prior_from_spec(const std::string& spec, Eigen::Index rows, Eigen::Index cols,
                                 std::uint64_t seed) {
  std::vector<std::string> parts;
  std::stringstream in(spec);
  for (std::string part; std::getline(in, part, ':');) parts.push_back(part);
  auto bad = [&]() {
    return DomainError("bad prior spec '" + spec +
                       "'; expected analytic[:rho], uniform:<channels>[:<high>], identity, one-hot or meshgrid");
  };
  auto number = [&](const std::string& text) {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) throw bad();
      return v;
    } catch (const std::logic_error&) {
      throw bad();
    }
  };
  if (parts.empty()) throw bad();
  const std::string& kind = parts.front();
  if (kind == "analytic" && parts.size() <= 2)
    return analytic_uniform_prior(rows, cols, parts.size() == 2 ? number(parts[1]) : kUniformPriorRho);
  if (kind == "uniform" && (parts.size() == 2 || parts.size() == 3)) {
    const double c = number(parts[1]);
    if (c < 1 || c != std::floor(c)) throw bad();
    return uniform_random_prior(static_cast<Eigen::Index>(c), rows, cols, parts.size() == 3 ? number(parts[2]) : 0.1,
                                seed);
  }
  if (parts.size() != 1) throw bad();
  if (kind == "identity") return identity_image_prior(rows, cols);
  if (kind == "one-hot") return one_hot_image_prior(rows, cols);
  if (kind == "meshgrid") return meshgrid_prior(rows, cols);
  throw bad();
}

ImagePrior meshgrid_prior(Eigen::Index rows, Eigen::Index cols) {
  check_dims(rows, cols);
  Eigen::MatrixXd z(2, rows * cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      z(0, i * cols + j) = rows > 1 ? static_cast<double>(i) / static_cast<double>(rows - 1) : 0.0;
      z(1, i * cols + j) = cols > 1 ? static_cast<double>(j) / static_cast<double>(cols - 1) : 0.0;
    }
  return ImagePrior::from_channels(std::move(z), rows, cols);
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> keys, Eigen::MatrixXd vectors)
    : keys_(std::move(keys)), vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(keys_.size()) != vectors_.cols())
    throw ShapeError("embedding table needs one vector per key");
  for (std::size_t k = 0; k < keys_.size(); ++k) {
    if (!index_.emplace(keys_[k], static_cast<Eigen::Index>(k)).second)
      throw FormatError("duplicate embedding key '" + keys_[k] + "'");
    if (keys_[k] == "*") default_ = static_cast<Eigen::Index>(k);
  }
}

EmbeddingTable EmbeddingTable::from_csv(const std::string& path) {
  const auto records = read_csv(path);
  if (records.empty()) throw FormatError("'" + path + "' is empty");
  const std::size_t width = records.front().fields.size();
  if (width < 2) throw FormatError(path + ": embedding rows need a key and at least one value");
  std::vector<std::string> keys;
  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(width - 1), static_cast<Eigen::Index>(records.size()));
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != width) {
      std::ostringstream msg;
      msg << path << ": line " << rec.line << " has " << rec.fields.size() << " fields, expected " << width;
      throw FormatError(msg.str());
    }
    keys.push_back(rec.fields[0]);
    for (std::size_t c = 1; c < width; ++c)
      vectors(static_cast<Eigen::Index>(c - 1), static_cast<Eigen::Index>(r)) = parse_number(rec.fields[c], rec.line);
  }
  return EmbeddingTable(std::move(keys), std::move(vectors));
}

std::optional<Eigen::VectorXd> EmbeddingTable::lookup(const std::string& key) const {
  const auto it = index_.find(key);
  if (it != index_.end()) return Eigen::VectorXd(vectors_.col(it->second));
  if (default_) return Eigen::VectorXd(vectors_.col(*default_));
  return std::nullopt;
}

FeaturePrior reference_prior(const EmbeddingTable& drugs, const EmbeddingTable& cells,
                             const std::vector<std::pair<std::string, std::string>>& pairs, double cell_scale) {
  if (pairs.empty()) throw ShapeError("reference prior needs at least one pair");
  if (!(cell_scale >= 0.0)) throw DomainError("cell_scale must be nonnegative");
  Eigen::MatrixXd raw(drugs.dim() + cells.dim(), static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [drug_key, cell_key] = pairs[k];
    const auto drug = drugs.lookup(drug_key);
    if (!drug) throw FormatError("unknown drug '" + drug_key + "' and no default drug vector");
    const auto cell = cells.lookup(cell_key);
    if (!cell) throw FormatError("unknown cell '" + cell_key + "' and no default cell vector");
    Eigen::VectorXd scaled = *cell;
    const double cell_norm = cell->norm();
    if (cell_norm > 0.0) scaled *= cell_scale * drug->norm() / cell_norm;
    const auto col = static_cast<Eigen::Index>(k);
    raw.col(col).head(drugs.dim()) = *drug;
    raw.col(col).tail(cells.dim()) = scaled;
  }
  return normalize_prior(raw);
}

FeaturePrior method_output_prior(const std::string& path, std::optional<double> identity_scale) {
  const Eigen::MatrixXd raw = read_dense_matrix(path);
  return normalize_prior(identity_scale ? augment_identity(raw, *identity_scale) : raw);
}

}  // namespace ntkmc
