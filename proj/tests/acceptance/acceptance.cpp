// Acceptance checks, one per criterion number:
//   acceptance <n>     runs criterion n (1-11), prints one PASS/FAIL line
// Exit status is 0 on PASS, 1 on FAIL, 2 on bad usage.

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ntkmc/cntk.hpp"
#include "ntkmc/dual.hpp"
#include "ntkmc/expand.hpp"
#include "ntkmc/fc_ntk.hpp"
#include "ntkmc/inpaint.hpp"
#include "ntkmc/metrics.hpp"
#include "ntkmc/priors.hpp"
#include "ntkmc/solve.hpp"

using namespace ntkmc;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Eigen::Index wrap(Eigen::Index x, Eigen::Index n) { return ((x % n) + n) % n; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. ReLU dual vs Monte Carlo.

Outcome criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const Activation relu = Activation::relu();
  const int samples = 1000000;
  const double c2 = 2.0;
  double worst_z = 0.0;
  bool ok = true;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (double xi : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    const double s = std::sqrt(std::max(0.0, 1.0 - xi * xi));
    double m1 = 0, q1 = 0, m2 = 0, q2 = 0;
    for (int k = 0; k < samples; ++k) {
      const double u = normal(rng);
      const double v = xi * u + s * normal(rng);
      const double f = c2 * std::max(u, 0.0) * std::max(v, 0.0);
      const double g = c2 * (u > 0 ? 1.0 : 0.0) * (v > 0 ? 1.0 : 0.0);
      m1 += f;
      q1 += f * f;
      m2 += g;
      q2 += g * g;
    }
    m1 /= samples;
    m2 /= samples;
    const double se1 = std::sqrt(std::max(q1 / samples - m1 * m1, 0.0) / samples);
    const double se2 = std::sqrt(std::max(q2 / samples - m2 * m2, 0.0) / samples);
    const double e1 = std::abs(dual(relu, xi) - m1), e2 = std::abs(dual_derivative(relu, xi) - m2);
    ok = ok && e1 <= 3 * se1 + 1e-12 && e2 <= 3 * se2 + 1e-12;
    if (se1 > 0) worst_z = std::max(worst_z, e1 / se1);
    if (se2 > 0) worst_z = std::max(worst_z, e2 / se2);
  }
  const double exact_err = std::max({std::abs(dual(relu, -1.0)), std::abs(dual(relu, 0.0) - 1.0 / kPi),
                                     std::abs(dual(relu, 1.0) - 1.0), std::abs(dual_derivative(relu, -1.0)),
                                     std::abs(dual_derivative(relu, 0.0) - 0.5),
                                     std::abs(dual_derivative(relu, 1.0) - 1.0)});
  ok = ok && exact_err <= 1e-12;
  const double secs = seconds_since(t0);
  ok = ok && secs < 10.0;
  return {ok, fmt("worst |err|/se %.2f (limit 3), closed-form err %.1e (limit 1e-12), %.1f s (limit 10)", worst_z,
                  exact_err, secs)};
}

// ---------------------------------------------------------------------------
// 2. 3x3 worked example, Z = I, depth 1, relu.

Outcome criterion_2() {
  ObservationSet obs(3, 3);
  obs.add(0, 1, 0.5);
  obs.add(0, 2, 0.3);
  obs.add(1, 0, 0.1);
  obs.add(1, 1, 0.2);
  obs.add(2, 0, 0.4);
  const Eigen::MatrixXd k = observation_kernel(obs, column_kernel(identity_prior(3), 1, Activation::relu()));
  const double a = 2.0, b = 1.0 / kPi;
  Eigen::MatrixXd printed(5, 5);
  printed << a, b, 0, 0, 0,
             b, a, 0, 0, 0,
             0, 0, a, b, 0,
             0, 0, b, a, 0,
             0, 0, 0, 0, a;
  const double err = (k - printed).cwiseAbs().maxCoeff();
  return {err <= 1e-12, fmt("max |K - printed| = %.2e (limit 1e-12)", err)};
}

// ---------------------------------------------------------------------------
// 3. One-hot prior closed form.

Outcome criterion_3() {
  double printed_err = 0.0, sm_err = 0.0;
  for (int l : {1, 3, 10, 50}) {
    const int n = l + 1;
    ObservationSet obs(1, n);
    double sum = 0.0;
    for (int j = 0; j < l; ++j) {
      const double v = 0.2 + 0.05 * j - 0.001 * j * j;
      obs.add(0, j, v);
      sum += v;
    }
    const double mean = sum / l;
    const double pred =
        complete_matrix(obs, identity_prior(n), 1, Activation::relu(), SolveOptions{})(0, l);
    const double g = 2 * kPi - 1;
    const double printed = (1.0 / g - l / (g * (g + kPi * l))) * mean;
    // Sherman-Morrison: K = (2 - 1/pi) I + (1/pi) 11^T, every entry of K^{-1}1 is 1 / (2 - 1/pi + l/pi).
    const double oracle = (1.0 / kPi) * sum / (2.0 - 1.0 / kPi + l / kPi);
    printed_err = std::max(printed_err, std::abs(pred - printed));
    sm_err = std::max(sm_err, std::abs(pred - oracle));
  }
  return {printed_err <= 1e-8,
          fmt("max |pred - printed coefficient * mean| = %.3e (limit 1e-8); max |pred - Sherman-Morrison| = %.1e; "
              "the Sherman-Morrison value is l/(2pi-1+l) * mean",
              printed_err, sm_err)};
}

// ---------------------------------------------------------------------------
// 4. Finite-width empirical NTK vs the analytic CNTK.
//
// Network on an m x n image with C channels, circular 3x3 convs:
//   g_h(x) = sum_{c,ab} B[c,ab,h] Z_c(x+ab),         B ~ N(0, 1)
//   y_h(x) = sqrt(2/k) relu(g_h(x))
//   f(p)   = (1/q) sum_{ab,h} A[ab,h] y_h(p+ab),     A ~ N(0, 1)
// Theta(p, p') = <df(p)/dtheta, df(p')/dtheta> over A and B.

Eigen::MatrixXd empirical_ntk(const Eigen::MatrixXd& z, Eigen::Index m, Eigen::Index n, Eigen::Index width,
                              std::uint64_t seed) {
  const int q = 3, h = 1;
  const Eigen::Index pix = m * n, taps = q * q, ch = z.rows();
  auto shifted = [&](Eigen::Index p, int t) {
    const Eigen::Index i = p / n, j = p % n;
    return wrap(i + t / q - h, m) * n + wrap(j + t % q - h, n);
  };
  Eigen::MatrixXd patches(pix, ch * taps);
  for (Eigen::Index p = 0; p < pix; ++p)
    for (Eigen::Index c = 0; c < ch; ++c)
      for (int t = 0; t < taps; ++t) patches(p, c * taps + t) = z(c, shifted(p, t));
  const Eigen::MatrixXd sigma0 = patches * patches.transpose();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd b(ch * taps, width), a(taps, width);
  for (Eigen::Index k = 0; k < b.size(); ++k) b(k) = normal(rng);
  for (Eigen::Index k = 0; k < a.size(); ++k) a(k) = normal(rng);

  const Eigen::MatrixXd g = patches * b;
  const Eigen::MatrixXd y = std::sqrt(2.0 / width) * g.cwiseMax(0.0);
  const Eigen::MatrixXd yy = y * y.transpose();

  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(pix, pix);
  // Readout weights A.
  for (Eigen::Index p = 0; p < pix; ++p)
    for (Eigen::Index p2 = 0; p2 < pix; ++p2)
      for (int t = 0; t < taps; ++t) theta(p, p2) += yy(shifted(p, t), shifted(p2, t));
  theta /= q * q;
  // Input weights B: df(p)/dB[c,ab',h] = (1/q) sum_ab A[ab,h] sqrt(2/k) 1[g_h(p+ab) > 0] Z_c(p+ab+ab').
  Eigen::MatrixXd u(pix, pix);
  for (Eigen::Index hh = 0; hh < width; ++hh) {
    u.setZero();
    for (Eigen::Index p = 0; p < pix; ++p)
      for (int t = 0; t < taps; ++t) {
        const Eigen::Index x = shifted(p, t);
        if (g(x, hh) > 0) u(p, x) += a(t, hh);
      }
    theta.noalias() += (2.0 / (width * q * q)) * (u * sigma0 * u.transpose());
  }
  return theta;
}

Outcome criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index m = 6, n = 6;
  const ImagePrior prior = uniform_random_prior(3, m, n, 1.0, 2024);
  const Eigen::MatrixXd exact = build_cntk(ArchSpec::plain(m, n, 1), prior).matrix;
  std::vector<double> errs;
  for (Eigen::Index width : {64, 256, 1024}) {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      sum += (empirical_ntk(prior.channels(), m, n, width, 1000 * width + seed) - exact).norm() / exact.norm();
    errs.push_back(sum / 20.0);
  }
  const double secs = seconds_since(t0);
  const bool ok = errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 0.10 && secs < 120.0;
  return {ok, fmt("mean relative Frobenius error k=64: %.4f, k=256: %.4f, k=1024: %.4f (decreasing, last < 0.10), "
                  "%.1f s (limit 120)",
                  errs[0], errs[1], errs[2], secs)};
}

// ---------------------------------------------------------------------------
// 5. Stationary closed form vs full recursion, shift invariance.

Outcome criterion_5() {
  double err = 0.0;
  bool shift_exact = true;
  for (Eigen::Index size : {8, 16})
    for (int depth = 1; depth <= 3; ++depth) {
      const ArchSpec arch = ArchSpec::plain(size, size, depth);
      const ImagePrior prior = analytic_uniform_prior(size, size);
      const PixelKernel full = build_cntk(arch, prior);
      const PixelKernel stat = build_stationary(arch, prior).materialize();
      err = std::max(err, (full.matrix - stat.matrix).cwiseAbs().maxCoeff());
      for (Eigen::Index a = 0; a < size && shift_exact; ++a)
        for (Eigen::Index b = 0; b < size && shift_exact; ++b)
          for (Eigen::Index p = 0; p < size * size && shift_exact; ++p)
            for (Eigen::Index p2 = 0; p2 < size * size; ++p2) {
              const Eigen::Index i = p / size, j = p % size, i2 = p2 / size, j2 = p2 % size;
              if (full(i, j, i2, j2) !=
                  full(wrap(i + a, size), wrap(j + b, size), wrap(i2 + a, size), wrap(j2 + b, size))) {
                shift_exact = false;
                break;
              }
            }
    }
  return {err <= 1e-10 && shift_exact,
          fmt("max |stationary - full| = %.2e (limit 1e-10), cyclic shift invariance %s", err,
              shift_exact ? "exact" : "violated")};
}

// ---------------------------------------------------------------------------
// 6. Expansion exactness.

Outcome criterion_6() {
  double err = 0.0;
  bool sizes_ok = true;
  for (int s : {1, 2}) {
    const ArchSpec arch = ArchSpec::encoder_decoder(4 << s, 4 << s, s);
    for (int p2 : {s + 2, s + 3}) {
      const Eigen::Index d2 = Eigen::Index{1} << p2;
      const CompactKernel ck = expand_kernel(arch, analytic_uniform_prior(d2, d2), d2);
      sizes_ok = sizes_ok && ck.entries() == (std::size_t{1} << (2 * s + 2 * p2));
      const PixelKernel direct = build_cntk(arch.with_input(d2, d2), analytic_uniform_prior(d2, d2));
      for (Eigen::Index p = 0; p < d2 * d2; ++p)
        for (Eigen::Index p2i = 0; p2i < d2 * d2; ++p2i)
          err = std::max(err, std::abs(ck.query(p / d2, p % d2, p2i / d2, p2i % d2) - direct.matrix(p, p2i)));
    }
  }
  return {err <= 1e-10 && sizes_ok,
          fmt("max |expanded - direct| = %.2e (limit 1e-10), compact store size 2^(2s+2p2): %s", err,
              sizes_ok ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 7. Sampling layers vs independent index maps.

CntkState random_state(Eigen::Index size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CntkState s;
  s.rows = s.cols = size;
  const Eigen::Index n = size * size;
  for (Eigen::MatrixXd* t : {&s.sigma, &s.sigma_dot, &s.k}) {
    t->resize(n, n);
    for (Eigen::Index k = 0; k < t->size(); ++k) (*t)(k) = u(rng);
  }
  s.post_activation = true;
  return s;
}

// Dense 1-D interpolation matrix for align-corners factor-2 upsampling.
Eigen::MatrixXd interp_1d(Eigen::Index d) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2 * d, d);
  for (Eigen::Index i = 0; i < 2 * d; ++i) {
    const double pos = static_cast<double>(i) * static_cast<double>(d - 1) / static_cast<double>(2 * d - 1);
    const auto lo = static_cast<Eigen::Index>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    w(i, lo) += 1.0 - frac;
    if (frac > 0) w(i, lo + 1) += frac;
  }
  return w;
}

Outcome criterion_7() {
  const Eigen::Index lo = 4, hi = 8;
  bool down_ok = true, near_ok = true;
  double bil_err = 0.0, wsum_err = 0.0;

  const CntkState big = random_state(hi, 1);
  const CntkState d = downsample(big);
  for (Eigen::Index i = 0; i < lo; ++i)
    for (Eigen::Index j = 0; j < lo; ++j)
      for (Eigen::Index i2 = 0; i2 < lo; ++i2)
        for (Eigen::Index j2 = 0; j2 < lo; ++j2) {
          const Eigen::Index a = i * lo + j, b = i2 * lo + j2;
          const Eigen::Index sa = 2 * i * hi + 2 * j, sb = 2 * i2 * hi + 2 * j2;
          down_ok = down_ok && d.sigma(a, b) == big.sigma(sa, sb) && d.sigma_dot(a, b) == big.sigma_dot(sa, sb) &&
                    d.k(a, b) == big.k(sa, sb);
        }

  const CntkState small = random_state(lo, 2);
  const CntkState u = upsample_nearest(small);
  for (Eigen::Index i = 0; i < hi; ++i)
    for (Eigen::Index j = 0; j < hi; ++j)
      for (Eigen::Index i2 = 0; i2 < hi; ++i2)
        for (Eigen::Index j2 = 0; j2 < hi; ++j2) {
          const Eigen::Index a = i * hi + j, b = i2 * hi + j2;
          const Eigen::Index sa = (i / 2) * lo + j / 2, sb = (i2 / 2) * lo + j2 / 2;
          near_ok = near_ok && u.sigma(a, b) == small.sigma(sa, sb) && u.sigma_dot(a, b) == small.sigma_dot(sa, sb) &&
                    u.k(a, b) == small.k(sa, sb);
        }

  const Eigen::MatrixXd w = interp_1d(lo);
  wsum_err = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
  for (const auto& tap : bilinear_taps(lo)) wsum_err = std::max(wsum_err, std::abs(tap.w_lo + tap.w_hi - 1.0));
  const CntkState bl = upsample_bilinear(small);
  auto oracle = [&](const Eigen::MatrixXd& t, Eigen::Index i, Eigen::Index j, Eigen::Index i2, Eigen::Index j2) {
    double acc = 0.0;
    for (Eigen::Index a = 0; a < lo; ++a)
      for (Eigen::Index b = 0; b < lo; ++b)
        for (Eigen::Index a2 = 0; a2 < lo; ++a2)
          for (Eigen::Index b2 = 0; b2 < lo; ++b2)
            acc += w(i, a) * w(j, b) * w(i2, a2) * w(j2, b2) * t(a * lo + b, a2 * lo + b2);
    return acc;
  };
  for (Eigen::Index i = 0; i < hi; ++i)
    for (Eigen::Index j = 0; j < hi; ++j)
      for (Eigen::Index i2 = 0; i2 < hi; ++i2)
        for (Eigen::Index j2 = 0; j2 < hi; ++j2) {
          const Eigen::Index a = i * hi + j, b = i2 * hi + j2;
          bil_err = std::max({bil_err, std::abs(bl.sigma(a, b) - oracle(small.sigma, i, j, i2, j2)),
                              std::abs(bl.sigma_dot(a, b) - oracle(small.sigma_dot, i, j, i2, j2)),
                              std::abs(bl.k(a, b) - oracle(small.k, i, j, i2, j2))});
        }
  // Bilinear values are sums of products of weights; only rounding may differ.
  const bool ok = down_ok && near_ok && bil_err <= 1e-13 && wsum_err <= 1e-12;
  return {ok, fmt("downsample %s, nearest upsample %s, bilinear max err %.1e (rounding limit 1e-13), weight sums "
                  "err %.1e (limit 1e-12)",
                  down_ok ? "exact" : "MISMATCH", near_ok ? "exact" : "MISMATCH", bil_err, wsum_err)};
}

// ---------------------------------------------------------------------------
// 8. Iterative vs direct solver, scale invariance.

Outcome criterion_8() {
  const Eigen::Index features = 20, total = 1200, train = 1000, test = total - train;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd raw(features, total);
  for (Eigen::Index k = 0; k < raw.size(); ++k) raw(k) = normal(rng);
  Eigen::VectorXd y(train);
  for (Eigen::Index j = 0; j < train; ++j) y(j) = raw(0, j) + raw(1, j) + raw(2, j) + 0.1 * normal(rng);

  const ColumnKernel ck = column_kernel(normalize_prior(augment_identity(raw, 1.5)), 1, Activation::relu());
  const Eigen::MatrixXd k = ck.matrix.topLeftCorner(train, train);
  const Eigen::MatrixXd cross = ck.matrix.topRightCorner(train, test);

  SolveOptions direct;
  const Eigen::MatrixXd p_direct = predict(direct_solve(k, y, direct), cross);
  SolveOptions iter;
  iter.mode = SolveOptions::Mode::Iterative;
  iter.epochs = 50;
  const Eigen::MatrixXd p_iter = predict(iterative_solve(DenseKernelOperator(k), y, iter).coefficients, cross);
  const double rel = (p_iter - p_direct).norm() / p_direct.norm();

  SolveOptions half = direct;
  half.kernel_scale = 0.5;
  const Eigen::MatrixXd p_half = predict(direct_solve(k, y, half), cross, 0.5);
  const double scale_rel = (p_half - p_direct).norm() / p_direct.norm();
  return {rel <= 1e-4 && scale_rel <= 1e-6,
          fmt("iterative vs direct relative difference %.2e (limit 1e-4), scale 0.5 vs 1 %.2e (limit 1e-6)", rel,
              scale_rel)};
}

// ---------------------------------------------------------------------------
// 9. PSD on random architectures.

Outcome criterion_9() {
  std::mt19937_64 rng(99);
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  double worst = std::numeric_limits<double>::infinity();
  std::string arch_list;
  int built = 0;
  for (int a = 0; a < 5; ++a) {
    const Eigen::Index size = pick(2) ? 16 : 8;
    const int s = pick(3);
    const int q = 1 + 2 * pick(3);
    const Activation act = pick(2) ? Activation::relu() : Activation::leaky_relu(0.1);
    const bool bilinear = s > 0 && pick(2);
    const int extra = pick(2);
    const ArchSpec arch = ArchSpec::encoder_decoder(size, size, s, q, act, bilinear, extra);
    arch_list += fmt("%s%ldx%ld s=%d q=%d %s%s", a ? "; " : "", static_cast<long>(size), static_cast<long>(size), s,
                     q, act.to_string().c_str(), bilinear ? " bilinear" : "");
    for (const ImagePrior& prior :
         {analytic_uniform_prior(size, size), uniform_random_prior(4, size, size, 0.1, 10 + a)}) {
      const PixelKernel k = build_cntk(arch, prior);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.matrix, Eigen::EigenvaluesOnly);
      const double scaled = es.eigenvalues().minCoeff() / (k.matrix.trace() / static_cast<double>(size * size));
      worst = std::min(worst, scaled);
      ++built;
    }
  }
  return {worst >= -1e-8,
          fmt("%d kernels, min eigenvalue / (trace/mn) = %.2e (limit -1e-8); archs: %s", built, worst,
              arch_list.c_str())};
}

// ---------------------------------------------------------------------------
// 10. Desk-scale inpainting.

Outcome criterion_10() {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n = 64;
  Eigen::MatrixXd img(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double x = static_cast<double>(i) / (n - 1), y = static_cast<double>(j) / (n - 1);
      img(i, j) = x + y > 1.3 ? 0.9 - 0.3 * x : 0.5 + 0.3 * std::sin(2 * kPi * x) * std::cos(2 * kPi * y);
    }
  BoolMatrix mask = BoolMatrix::Constant(n, n, true);
  mask.block(24, 24, 16, 16).setConstant(false);
  const MaskedImage input{Image::gray(img), mask};

  const ArchSpec arch = ArchSpec::encoder_decoder(n, n, 2);
  SolveOptions opts;
  opts.kernel_scale = 0.5;
  const CompactKernel ck = expand_kernel(arch, analytic_uniform_prior(n, n), n);
  const double cntk_psnr = psnr(inpaint(input, CompactKernelSource(ck), opts).planes[0], img);
  const double mean_psnr = psnr(mean_fill(input).planes[0], img);

  // Single-channel identity-matrix prior: pixels far from the diagonal see
  // an all-zero window, so the kernel is singular without a small ridge.
  BuildOptions bo;
  bo.allow_degenerate = true;
  const PixelKernel id_kernel = build_cntk(arch, identity_image_prior(n, n), nullptr, bo);
  SolveOptions id_opts = opts;
  id_opts.ridge = Ridge::trace_scaled(1e-8);
  const double id_psnr = psnr(inpaint(input, FullKernelSource(id_kernel), id_opts).planes[0], img);
  const double secs = seconds_since(t0);
  const bool ok = cntk_psnr >= mean_psnr + 3.0 && cntk_psnr >= id_psnr + 1.0 && secs < 300.0;
  return {ok, fmt("PSNR analytic CNTK %.2f dB, mean fill %.2f dB (margin %.2f, need 3), identity prior %.2f dB "
                  "(margin %.2f, need 1), %.1f s (limit 300)",
                  cntk_psnr, mean_psnr, cntk_psnr - mean_psnr, id_psnr, cntk_psnr - id_psnr, secs)};
}

// ---------------------------------------------------------------------------
// 11. Kernel rows peak at their own pixel.

Outcome criterion_11() {
  const Eigen::Index n = 16;
  int bad = 0;
  for (int s : {0, 1}) {
    const PixelKernel k = build_cntk(ArchSpec::encoder_decoder(n, n, s), analytic_uniform_prior(n, n));
    for (Eigen::Index p = 0; p < n * n; ++p) {
      Eigen::Index arg = 0;
      k.matrix.row(p).maxCoeff(&arg);
      if (arg != p) ++bad;
    }
  }
  return {bad == 0, fmt("%d of %ld rows peak away from their own pixel (s = 0 and 1, 16x16)", bad, 2L * n * n)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion_1, criterion_2, criterion_3, criterion_4,
                                                       criterion_5, criterion_6, criterion_7, criterion_8,
                                                       criterion_9, criterion_10, criterion_11};
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <criterion 1-%zu>\n", argv[0], criteria.size());
    return 2;
  }
  const int which = std::atoi(argv[1]);
  if (which < 1 || which > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "criterion must lie in 1-%zu\n", criteria.size());
    return 2;
  }
  Outcome o;
  try {
    o = criteria[static_cast<std::size_t>(which - 1)]();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  std::printf("criterion %d: %s  %s\n", which, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  return o.pass ? 0 : 1;
}
