#include <benchmark/benchmark.h>

#include <random>

#include "ntkmc/cntk.hpp"
#include "ntkmc/dual.hpp"
#include "ntkmc/expand.hpp"
#include "ntkmc/fc_ntk.hpp"
#include "ntkmc/inpaint.hpp"
#include "ntkmc/solve.hpp"

using namespace ntkmc;

namespace {

void BM_Kappa(benchmark::State& state) {
  const auto act = Activation::relu();
  const int depth = static_cast<int>(state.range(0));
  double xi = -0.999, acc = 0.0;
  for (auto _ : state) {
    acc += kappa(act, depth, xi);
    xi = xi > 0.999 ? -0.999 : xi + 1e-3;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_Kappa)->Arg(1)->Arg(4)->Arg(16);

void BM_ColumnKernel(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd raw(32, n);
  for (Eigen::Index k = 0; k < raw.size(); ++k) raw(k) = normal(rng);
  const FeaturePrior prior = normalize_prior(raw);
  for (auto _ : state) benchmark::DoNotOptimize(column_kernel(prior, 2, Activation::relu()).matrix.data());
  state.SetComplexityN(n);
}
BENCHMARK(BM_ColumnKernel)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);

void BM_InitAndConvolve(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const ImagePrior prior = analytic_uniform_prior(n, n);
  for (auto _ : state) {
    const CntkState s = conv_activation_update(init_state(prior, 3), 3, Activation::relu());
    benchmark::DoNotOptimize(s.k.data());
  }
}
BENCHMARK(BM_InitAndConvolve)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_BuildCntk(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const ArchSpec arch = ArchSpec::encoder_decoder(n, n, 1);
  const ImagePrior prior = analytic_uniform_prior(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(build_cntk(arch, prior).matrix.data());
}
BENCHMARK(BM_BuildCntk)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ExpandKernel(benchmark::State& state) {
  const Eigen::Index d2 = state.range(0);
  const ArchSpec arch = ArchSpec::encoder_decoder(8, 8, 2);
  const PixelKernel base = build_cntk(arch, analytic_uniform_prior(8, 8));
  for (auto _ : state) benchmark::DoNotOptimize(expand_kernel(base, 2, d2).data().data());
}
BENCHMARK(BM_ExpandKernel)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_CompactQuery(benchmark::State& state) {
  const CompactKernel ck = expand_kernel(ArchSpec::encoder_decoder(8, 8, 2), analytic_uniform_prior(8, 8), 64);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<Eigen::Index> u(0, 63);
  double acc = 0.0;
  for (auto _ : state) acc += ck.query(u(rng), u(rng), u(rng), u(rng));
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_CompactQuery);

Eigen::MatrixXd spd(Eigen::Index n) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd x(2, n);
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = u(rng);
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = std::exp(-(x.col(i) - x.col(j)).squaredNorm());
  return k;
}

void BM_DirectSolve(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd k = spd(n);
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(n);
  SolveOptions o;
  o.ridge = Ridge::trace_scaled(1e-6);
  for (auto _ : state) benchmark::DoNotOptimize(direct_solve(k, y, o).data());
}
BENCHMARK(BM_DirectSolve)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_IterativeEpochs(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd k = spd(n);
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(n);
  SolveOptions o;
  o.mode = SolveOptions::Mode::Iterative;
  o.ridge = Ridge::trace_scaled(1e-6);
  o.epochs = 10;
  for (auto _ : state) benchmark::DoNotOptimize(iterative_solve(DenseKernelOperator(k), y, o).coefficients.data());
}
BENCHMARK(BM_IterativeEpochs)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_GramOperatorApply(benchmark::State& state) {
  const CompactKernel ck = expand_kernel(ArchSpec::encoder_decoder(8, 8, 2), analytic_uniform_prior(8, 8), 64);
  const CompactKernelSource src(ck);
  std::vector<Pixel> coords;
  for (Eigen::Index i = 0; i < 64; ++i)
    for (Eigen::Index j = 0; j < 64; ++j) coords.emplace_back(i, j);
  const GramOperator op(src, coords);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(op.size(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(x).data());
}
BENCHMARK(BM_GramOperatorApply)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
