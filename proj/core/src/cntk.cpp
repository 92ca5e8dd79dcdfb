#include "ntkmc/cntk.hpp"

#include <Eigen/SparseCore>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "ntkmc/errors.hpp"
#include "ntkmc/parallel.hpp"

namespace ntkmc {

namespace {

Eigen::Index wrap(Eigen::Index x, Eigen::Index n) {
  const Eigen::Index r = x % n;
  return r < 0 ? r + n : r;
}

// shifts[s][p] = flat index of pixel p moved by the s-th window offset.
std::vector<std::vector<Eigen::Index>> window_shifts(Eigen::Index rows, Eigen::Index cols, int q) {
  if (q < 1 || q % 2 == 0) throw DomainError("filter size must be a positive odd integer");
  const int h = (q - 1) / 2;
  std::vector<std::vector<Eigen::Index>> shifts;
  shifts.reserve(static_cast<std::size_t>(q) * static_cast<std::size_t>(q));
  for (int a = -h; a <= h; ++a)
    for (int b = -h; b <= h; ++b) {
      std::vector<Eigen::Index> s(static_cast<std::size_t>(rows * cols));
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
          s[static_cast<std::size_t>(i * cols + j)] = wrap(i + a, rows) * cols + wrap(j + b, cols);
      shifts.push_back(std::move(s));
    }
  return shifts;
}

// out(p, p') = scale * sum_s in(shift_s(p), shift_s(p')). Columns are
// filled independently so the loop parallelizes.
Eigen::MatrixXd window_sum(const Eigen::MatrixXd& in, Eigen::Index rows, Eigen::Index cols, int q, double scale) {
  const auto shifts = window_shifts(rows, cols, q);
  const Eigen::Index n = rows * cols;
  Eigen::MatrixXd out(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    for (auto p = static_cast<Eigen::Index>(begin); p < static_cast<Eigen::Index>(end); ++p) {
      auto col = out.col(p);
      col.setZero();
      for (const auto& s : shifts) {
        const auto src = in.col(s[static_cast<std::size_t>(p)]);
        for (Eigen::Index r = 0; r < n; ++r) col(r) += src(s[static_cast<std::size_t>(r)]);
      }
      col *= scale;
    }
  }, 8);
  return out;
}

void require_phase(const CntkState& state, bool post, const char* op) {
  if (state.post_activation != post) {
    std::ostringstream msg;
    msg << op << " expects a " << (post ? "post" : "pre") << "-activation state";
    throw ShapeError(msg.str());
  }
}

void check_state(const CntkState& s) {
  const Eigen::Index n = s.pixels();
  if (s.rows < 1 || s.cols < 1 || s.sigma.rows() != n || s.sigma.cols() != n || s.k.rows() != n ||
      s.k.cols() != n || s.sigma_dot.rows() != n || s.sigma_dot.cols() != n)
    throw ShapeError("CNTK state tensors do not match its dimensions");
}

// Applies an index map out(p, p') = in(src[p], src[p']) to all tensors.
CntkState remap(const CntkState& state, Eigen::Index rows, Eigen::Index cols, const std::vector<Eigen::Index>& src) {
  CntkState out;
  out.rows = rows;
  out.cols = cols;
  out.post_activation = state.post_activation;
  out.clamped = state.clamped;
  out.allow_degenerate = state.allow_degenerate;
  const Eigen::Index n = rows * cols;
  auto apply = [&](const Eigen::MatrixXd& in) {
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index r = 0; r < n; ++r) m(r, c) = in(src[static_cast<std::size_t>(r)], src[static_cast<std::size_t>(c)]);
    return m;
  };
  out.sigma = apply(state.sigma);
  out.sigma_dot = apply(state.sigma_dot);
  out.k = apply(state.k);
  return out;
}

Eigen::SparseMatrix<double> bilinear_matrix(Eigen::Index rows, Eigen::Index cols) {
  const auto tr = bilinear_taps(rows);
  const auto tc = bilinear_taps(cols);
  const Eigen::Index out_cols = 2 * cols;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(16 * rows * cols));
  for (Eigen::Index i = 0; i < 2 * rows; ++i)
    for (Eigen::Index j = 0; j < out_cols; ++j) {
      const auto& a = tr[static_cast<std::size_t>(i)];
      const auto& b = tc[static_cast<std::size_t>(j)];
      const Eigen::Index row = i * out_cols + j;
      const Eigen::Index ri[2] = {a.lo, a.hi};
      const double wi[2] = {a.w_lo, a.w_hi};
      const Eigen::Index cj[2] = {b.lo, b.hi};
      const double wj[2] = {b.w_lo, b.w_hi};
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          if (wi[x] * wj[y] != 0.0) entries.emplace_back(row, ri[x] * cols + cj[y], wi[x] * wj[y]);
    }
  Eigen::SparseMatrix<double> w(4 * rows * cols, rows * cols);
  w.setFromTriplets(entries.begin(), entries.end());
  return w;
}

}  // namespace

CntkState init_state(const ImagePrior& prior, int q, bool allow_degenerate) {
  CntkState s;
  s.allow_degenerate = allow_degenerate;
  s.rows = prior.rows();
  s.cols = prior.cols();
  const Eigen::Index n = s.pixels();
  const double q2 = static_cast<double>(q) * q;
  if (q < 1 || q % 2 == 0) throw DomainError("filter size must be a positive odd integer");
  if (prior.is_analytic()) {
    // Shifting both pixels by the same offset keeps them equal or distinct,
    // so every window term is 1 or rho.
    s.sigma = Eigen::MatrixXd::Constant(n, n, q2 * prior.rho());
    s.sigma.diagonal().setConstant(q2);
  } else {
    s.sigma = window_sum(prior.pixel_gram(), s.rows, s.cols, q, 1.0);
    for (Eigen::Index p = 0; p < n && !allow_degenerate; ++p)
      if (!(s.sigma(p, p) > 0.0)) {
        std::ostringstream msg;
        msg << "degenerate prior: the q = " << q << " window around pixel (" << p / s.cols << ", " << p % s.cols
            << ") is all zero";
        throw DomainError(msg.str());
      }
  }
  s.k = s.sigma;
  s.sigma_dot = Eigen::MatrixXd::Ones(n, n);
  return s;
}

CntkState activate(const CntkState& state, const Activation& act) {
  check_state(state);
  require_phase(state, false, "activate");
  const Eigen::Index n = state.pixels();
  CntkState out;
  out.rows = state.rows;
  out.cols = state.cols;
  out.post_activation = true;
  out.allow_degenerate = state.allow_degenerate;
  out.k = state.k;
  out.sigma.resize(n, n);
  out.sigma_dot.resize(n, n);
  const Eigen::VectorXd diag = state.sigma.diagonal();
  for (Eigen::Index p = 0; p < n; ++p)
    if (diag(p) < 0.0 || (diag(p) == 0.0 && !state.allow_degenerate) || std::isnan(diag(p)))
      throw NumericError("pre-activation variance is not positive");
  std::atomic<std::size_t> clamped{0};
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    std::size_t local = 0;
    for (auto c = static_cast<Eigen::Index>(begin); c < static_cast<Eigen::Index>(end); ++c)
      for (Eigen::Index r = 0; r < n; ++r) {
        const double norm = std::sqrt(diag(r) * diag(c));
        if (norm == 0.0) {
          out.sigma(r, c) = 0.0;
          out.sigma_dot(r, c) = 0.0;
          continue;
        }
        const double xi = state.sigma(r, c) / norm;
        if (std::abs(xi) > 1.0) ++local;
        out.sigma(r, c) = norm * dual(act, xi);
        out.sigma_dot(r, c) = dual_derivative(act, xi);
      }
    clamped += local;
  }, 8);
  out.clamped = state.clamped + clamped.load();
  return out;
}

CntkState convolve(const CntkState& state, int q) {
  check_state(state);
  require_phase(state, true, "convolve");
  const double inv = 1.0 / (static_cast<double>(q) * q);
  CntkState out;
  out.rows = state.rows;
  out.cols = state.cols;
  out.post_activation = false;
  out.clamped = state.clamped;
  out.allow_degenerate = state.allow_degenerate;
  out.sigma = window_sum(state.sigma, state.rows, state.cols, q, inv);
  out.k = out.sigma + window_sum(state.sigma_dot.cwiseProduct(state.k), state.rows, state.cols, q, inv);
  out.sigma_dot = state.sigma_dot;
  return out;
}

CntkState conv_activation_update(const CntkState& state, int q, const Activation& act) {
  return convolve(activate(state, act), q);
}

CntkState downsample(const CntkState& state) {
  check_state(state);
  if (state.rows % 2 || state.cols % 2) {
    std::ostringstream msg;
    msg << "cannot downsample a " << state.rows << " x " << state.cols << " state";
    throw ShapeError(msg.str());
  }
  const Eigen::Index rows = state.rows / 2, cols = state.cols / 2;
  std::vector<Eigen::Index> src(static_cast<std::size_t>(rows * cols));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) src[static_cast<std::size_t>(i * cols + j)] = state.flat(2 * i, 2 * j);
  return remap(state, rows, cols, src);
}

CntkState upsample_nearest(const CntkState& state) {
  check_state(state);
  const Eigen::Index rows = state.rows * 2, cols = state.cols * 2;
  std::vector<Eigen::Index> src(static_cast<std::size_t>(rows * cols));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) src[static_cast<std::size_t>(i * cols + j)] = state.flat(i / 2, j / 2);
  return remap(state, rows, cols, src);
}

std::vector<BilinearTap> bilinear_taps(Eigen::Index d) {
  if (d < 1) throw ShapeError("bilinear upsampling needs a positive size");
  std::vector<BilinearTap> taps(static_cast<std::size_t>(2 * d));
  const Eigen::Index num = d - 1, den = 2 * d - 1;
  for (Eigen::Index i = 0; i < 2 * d; ++i) {
    // alpha * i = num * i / den, split into integer and fractional parts
    // exactly so the last output sample lands on the last input sample.
    const Eigen::Index r = (num * i) / den;
    const double frac = static_cast<double>(num * i - r * den) / static_cast<double>(den);
    auto& t = taps[static_cast<std::size_t>(i)];
    t.lo = r;
    t.hi = std::min(r + 1, d - 1);
    t.w_lo = 1.0 - frac;
    t.w_hi = frac;
  }
  return taps;
}

CntkState upsample_bilinear(const CntkState& state) {
  check_state(state);
  const Eigen::SparseMatrix<double> w = bilinear_matrix(state.rows, state.cols);
  const Eigen::SparseMatrix<double> wt = w.transpose();
  auto apply = [&](const Eigen::MatrixXd& t) -> Eigen::MatrixXd {
    const Eigen::MatrixXd left = w * t;
    return left * wt;
  };
  CntkState out;
  out.rows = state.rows * 2;
  out.cols = state.cols * 2;
  out.post_activation = state.post_activation;
  out.clamped = state.clamped;
  out.allow_degenerate = state.allow_degenerate;
  out.sigma = apply(state.sigma);
  out.sigma_dot = apply(state.sigma_dot);
  out.k = apply(state.k);
  return out;
}

PixelKernel build_cntk(const ArchSpec& arch, const ImagePrior& prior, BuildReport* report,
                       const BuildOptions& options) {
  arch.validate();
  if (arch.rows() != prior.rows() || arch.cols() != prior.cols()) {
    std::ostringstream msg;
    msg << "arch expects " << arch.rows() << " x " << arch.cols() << " inputs but the prior is " << prior.rows()
        << " x " << prior.cols();
    throw ShapeError(msg.str());
  }
  const auto& layers = arch.layers();
  CntkState state = init_state(prior, layers.front().q, options.allow_degenerate);
  std::size_t degenerate = 0;
  for (Eigen::Index p = 0; p < state.pixels(); ++p)
    if (state.sigma(p, p) == 0.0) ++degenerate;
  int last_q = layers.front().q;
  for (std::size_t k = 1; k < layers.size(); ++k) {
    const auto& l = layers[k];
    switch (l.kind) {
      case Layer::Kind::Conv:
        state = convolve(state, l.q);
        last_q = l.q;
        break;
      case Layer::Kind::Act:
        state = activate(state, l.act);
        break;
      case Layer::Kind::Down:
        state = downsample(state);
        break;
      case Layer::Kind::UpNearest:
        state = upsample_nearest(state);
        break;
      case Layer::Kind::UpBilinear:
        if (state.post_activation) {
          // Bilinear mixing is not an index map: the derivative term must be
          // combined with k before the quadratic form is applied.
          state.k = state.sigma_dot.cwiseProduct(state.k);
          state.sigma_dot.setOnes();
        }
        state = upsample_bilinear(state);
        break;
    }
  }
  if (state.post_activation) state = convolve(state, last_q);
  if (report) {
    report->clamped = state.clamped;
    report->degenerate_pixels = degenerate;
  }
  PixelKernel out{state.rows, state.cols, std::move(state.k)};
  return out;
}

double StationaryKernel::operator()(Eigen::Index i, Eigen::Index j, Eigen::Index i2, Eigen::Index j2) const {
  return table(wrap(i - i2, rows()), wrap(j - j2, cols()));
}

PixelKernel StationaryKernel::materialize() const {
  const Eigen::Index m = rows(), n = cols();
  PixelKernel k{m, n, Eigen::MatrixXd(m * n, m * n)};
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i2 = 0; i2 < m; ++i2)
        for (Eigen::Index j2 = 0; j2 < n; ++j2) k.matrix(i * n + j, i2 * n + j2) = (*this)(i, j, i2, j2);
  return k;
}

Eigen::MatrixXd stationary_psi(const ImagePrior& prior, int q) {
  const Eigen::Index m = prior.rows(), n = prior.cols();
  const double q2 = static_cast<double>(q) * q;
  if (prior.is_analytic()) {
    Eigen::MatrixXd psi = Eigen::MatrixXd::Constant(m, n, q2 * prior.rho());
    psi(0, 0) = q2;
    return psi;
  }
  const Eigen::MatrixXd s0 = init_state(prior, q).sigma;
  Eigen::MatrixXd psi(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) psi(i, j) = s0(i * n + j, 0);
  const double tol = 1e-10 * s0.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i2 = 0; i2 < m; ++i2)
        for (Eigen::Index j2 = 0; j2 < n; ++j2)
          if (std::abs(s0(i * n + j, i2 * n + j2) - psi(wrap(i - i2, m), wrap(j - j2, n))) > tol) {
            std::ostringstream msg;
            msg << "prior is not stationary: inner product of (" << i << ", " << j << ") and (" << i2 << ", " << j2
                << ") differs from the same offset at the origin";
            throw UnsupportedError(msg.str());
          }
  return psi;
}

StationaryKernel build_stationary(const ArchSpec& arch, const ImagePrior& prior) {
  arch.validate();
  if (arch.rows() != prior.rows() || arch.cols() != prior.cols()) throw ShapeError("arch and prior sizes differ");
  if (arch.downsample_count() || arch.upsample_count())
    throw UnsupportedError("the stationary closed form does not cover sampling layers");
  const Activation* act = nullptr;
  for (const auto& l : arch.layers()) {
    if (l.kind != Layer::Kind::Act) continue;
    if (act && !(*act == l.act)) throw UnsupportedError("the stationary closed form needs one shared activation");
    act = &l.act;
  }
  const int depth = arch.depth();
  const Eigen::MatrixXd psi = stationary_psi(prior, arch.layers().front().q);
  const double psi0 = psi(0, 0);
  if (!(psi0 > 0.0)) throw DomainError("degenerate prior: zero self inner product");
  StationaryKernel out{Eigen::MatrixXd(psi.rows(), psi.cols())};
  // K_d = psi0 * kappa_d(psi / psi0): the scalar recursion per offset.
  for (Eigen::Index i = 0; i < psi.rows(); ++i)
    for (Eigen::Index j = 0; j < psi.cols(); ++j) out.table(i, j) = psi0 * kappa(*act, depth, psi(i, j) / psi0);
  return out;
}

Eigen::MatrixXd kernel_row(const PixelKernel& kernel, Eigen::Index i, Eigen::Index j) {
  if (i < 0 || i >= kernel.rows || j < 0 || j >= kernel.cols) {
    std::ostringstream msg;
    msg << "pixel (" << i << ", " << j << ") outside a " << kernel.rows << " x " << kernel.cols << " kernel";
    throw IndexError(msg.str());
  }
  Eigen::MatrixXd row(kernel.rows, kernel.cols);
  const Eigen::Index p = kernel.flat(i, j);
  for (Eigen::Index a = 0; a < kernel.rows; ++a)
    for (Eigen::Index b = 0; b < kernel.cols; ++b) row(a, b) = kernel.matrix(p, kernel.flat(a, b));
  return row;
}

Eigen::MatrixXd percentile_view(const Eigen::MatrixXd& row, double pct) {
  if (!(pct >= 0.0 && pct < 100.0)) throw DomainError("percentile must lie in [0, 100)");
  const double lo = row.minCoeff(), hi = row.maxCoeff();
  Eigen::MatrixXd out = hi > lo ? Eigen::MatrixXd((row.array() - lo) / (hi - lo)) : Eigen::MatrixXd::Zero(row.rows(), row.cols());
  const auto count = static_cast<std::size_t>(out.size());
  const auto keep = static_cast<std::size_t>(std::floor((100.0 - pct) * static_cast<double>(count) / 100.0));
  if (keep >= count) return out;
  std::vector<double> sorted(out.data(), out.data() + out.size());
  std::sort(sorted.begin(), sorted.end());
  const double cut = sorted[count - keep - 1];
  for (Eigen::Index k = 0; k < out.size(); ++k)
    if (out(k) <= cut) out(k) = 0.0;
  return out;
}

}  // namespace ntkmc
