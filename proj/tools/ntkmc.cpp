// ntkmc: command-line front end for kernel precompute/expand, image
// inpainting, heatmaps, tabular completion and metrics.

#include <sys/resource.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "ntkmc/arch.hpp"
#include "ntkmc/cntk.hpp"
#include "ntkmc/csv.hpp"
#include "ntkmc/errors.hpp"
#include "ntkmc/expand.hpp"
#include "ntkmc/fc_ntk.hpp"
#include "ntkmc/image.hpp"
#include "ntkmc/inpaint.hpp"
#include "ntkmc/kernel_io.hpp"
#include "ntkmc/metrics.hpp"
#include "ntkmc/parallel.hpp"
#include "ntkmc/priors.hpp"
#include "ntkmc/solve.hpp"

namespace {

using namespace ntkmc;

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitFormat = 4;

struct Shared {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string ridge = "none";
  std::optional<int> epochs;
  std::optional<double> kernel_scale;
  std::string mode = "direct";
};

void add_shared(CLI::App* app, Shared& sh, bool solver) {
  app->add_option("--seed", sh.seed, "Seed for random priors and solver subsampling");
  app->add_option("--threads", sh.threads, "Worker thread cap (0 = all cores)");
  if (!solver) return;
  app->add_option("--ridge", sh.ridge, "none | abs:<lambda> | trace:<c>");
  app->add_option("--epochs", sh.epochs, "Iterative solver epochs");
  app->add_option("--kernel-scale", sh.kernel_scale, "Multiplier applied to every kernel value (inpaint 0.5, complete 1)");
  app->add_option("--mode", sh.mode, "Solver: direct | iterative")->check(CLI::IsMember({"direct", "iterative"}));
}

SolveOptions solve_options(const Shared& sh, int default_epochs, double default_scale) {
  SolveOptions o;
  o.mode = sh.mode == "iterative" ? SolveOptions::Mode::Iterative : SolveOptions::Mode::Direct;
  o.ridge = Ridge::parse(sh.ridge);
  o.kernel_scale = sh.kernel_scale.value_or(default_scale);
  o.epochs = sh.epochs.value_or(default_epochs);
  o.seed = sh.seed;
  o.validate();
  return o;
}

// Peak resident set and wall time since start, on one line.
void resource_report(const char* what, std::chrono::steady_clock::time_point start) {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "ntkmc %s: wall %.2f s, peak rss %.1f MiB\n", what, secs,
               static_cast<double>(ru.ru_maxrss) / 1024.0);
}

std::pair<Eigen::Index, Eigen::Index> parse_size(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw DomainError("size must look like 64x64, got '" + text + "'");
  try {
    return {std::stol(text.substr(0, x)), std::stol(text.substr(x + 1))};
  } catch (const std::logic_error&) {
    throw DomainError("size must look like 64x64, got '" + text + "'");
  }
}

// A kernel either loaded from disk or built in memory. The source views
// the holder's own members, so bind() runs after the holder has settled.
struct KernelHolder {
  std::optional<PixelKernel> full;
  std::optional<CompactKernel> compact;
  std::unique_ptr<KernelSource> source;

  void bind() {
    if (compact)
      source = std::make_unique<CompactKernelSource>(*compact);
    else
      source = std::make_unique<FullKernelSource>(*full);
  }
};

KernelHolder load_or_build(const std::string& kernel_path, const std::string& arch_path, const std::string& prior_spec,
                           Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  KernelHolder h;
  if (!kernel_path.empty()) {
    auto loaded = load_kernel(kernel_path);
    h.full = std::move(loaded.full);
    h.compact = std::move(loaded.compact);
  } else {
    if (arch_path.empty() || prior_spec.empty())
      throw DomainError("give either --kernel or both --arch and --prior");
    const ArchSpec arch = ArchSpec::from_file(arch_path).with_input(rows, cols);
    const ImagePrior prior = image_prior_from_spec(prior_spec, rows, cols, seed);
    bool expandable = rows == cols && rows > 0 && (rows & (rows - 1)) == 0 &&
                      rows > (Eigen::Index{2} << arch.downsample_count());
    if (expandable) {
      try {
        check_expandable(arch, prior);
      } catch (const UnsupportedError&) {
        expandable = false;
      }
    }
    if (expandable) {
      h.compact = expand_kernel(arch, prior, rows);
    } else {
      BuildOptions bo;
      bo.allow_degenerate = prior_spec == "identity";
      h.full = build_cntk(arch, prior, nullptr, bo);
    }
  }
  return h;
}

int run_precompute(const std::string& arch_path, const std::string& prior_spec, const std::string& out,
                   const std::string& size, std::optional<int> p2, bool allow_degenerate, const Shared& sh) {
  ArchSpec arch = ArchSpec::from_file(arch_path);
  if (!size.empty()) {
    const auto [r, c] = parse_size(size);
    arch = arch.with_input(r, c);
  }
  if (p2) {
    if (*p2 < 1 || *p2 > 30) throw DomainError("--p2 must lie in [1, 30]");
    const Eigen::Index d2 = Eigen::Index{1} << *p2;
    const ImagePrior prior = image_prior_from_spec(prior_spec, d2, d2, sh.seed);
    const CompactKernel ck = expand_kernel(arch.with_input(d2, d2), prior, d2);
    save_compact_kernel(out, ck);
    std::fprintf(stderr, "compact kernel: s = %d, %lld x %lld, %zu values\n", ck.s(), static_cast<long long>(d2),
                 static_cast<long long>(d2), ck.entries());
    return 0;
  }
  const ImagePrior prior = image_prior_from_spec(prior_spec, arch.rows(), arch.cols(), sh.seed);
  BuildOptions bo;
  bo.allow_degenerate = allow_degenerate || prior_spec == "identity";
  BuildReport report;
  const PixelKernel k = build_cntk(arch, prior, &report, bo);
  save_full_kernel(out, k, full_kernel_header(arch, prior));
  std::fprintf(stderr, "full kernel: %lld x %lld, clamped correlations %zu, zero-window pixels %zu\n",
               static_cast<long long>(k.rows), static_cast<long long>(k.cols), report.clamped,
               report.degenerate_pixels);
  return 0;
}

int run_expand(const std::string& in, int p2, const std::string& out) {
  const LoadedKernel loaded = load_kernel(in);
  if (!loaded.full) throw UnsupportedError("expand needs a full base kernel, got a compact one");
  if (!loaded.header.expandable())
    throw UnsupportedError("kernel was not built from an expandable arch and analytic prior");
  if (p2 < 1 || p2 > 30) throw DomainError("--p2 must lie in [1, 30]");
  CompactKernel ck = expand_kernel(*loaded.full, static_cast<int>(loaded.header.s), Eigen::Index{1} << p2);
  ck.arch_hash = loaded.header.arch_hash;
  ck.rho = loaded.header.rho;
  save_compact_kernel(out, ck);
  return 0;
}

int run_inpaint(const std::string& image_path, const std::string& mask_path, const std::string& kernel_path,
                const std::string& arch_path, const std::string& prior_spec, const std::string& out,
                const std::string& baseline_out, const Shared& sh) {
  MaskedImage mi{read_png(image_path), read_mask(mask_path)};
  mi.validate();
  KernelHolder kh = load_or_build(kernel_path, arch_path, prior_spec, mi.image.rows(), mi.image.cols(), sh.seed);
  kh.bind();
  InpaintReport rep;
  const Image result = inpaint(mi, *kh.source, solve_options(sh, 10, 0.5), &rep);
  write_png(out, result);
  if (!baseline_out.empty()) write_png(baseline_out, mean_fill(mi));
  std::fprintf(stderr, "observed %lld, missing %lld, ridge %.3g\n", static_cast<long long>(rep.observed),
               static_cast<long long>(rep.missing), rep.ridge);
  if (rep.used_iterative) {
    std::fprintf(stderr, "iterative: rank %d, subsample %lld, step %.4g, final residual %.3e\n", rep.iterative.rank,
                 static_cast<long long>(rep.iterative.subsample), rep.iterative.step,
                 rep.iterative.residuals.empty() ? 0.0 : rep.iterative.residuals.back());
  } else {
    std::fprintf(stderr, "weight sums min %.4f mean %.4f max %.4f\n", rep.weight_sum_min, rep.weight_sum_mean,
                 rep.weight_sum_max);
  }
  return 0;
}

int run_heatmap(const std::string& kernel_path, const std::string& arch_path, const std::string& prior_spec,
                const std::string& size, Eigen::Index i, Eigen::Index j, double pct, const std::string& out,
                const Shared& sh) {
  Eigen::Index rows = 0, cols = 0;
  if (kernel_path.empty()) {
    if (size.empty()) throw DomainError("--size is required when building the kernel from --arch");
    std::tie(rows, cols) = parse_size(size);
  }
  KernelHolder kh = load_or_build(kernel_path, arch_path, prior_spec, rows, cols, sh.seed);
  kh.bind();
  write_png(out, heatmap(*kh.source, i, j, pct));
  return 0;
}

int run_complete(const std::string& observed, bool triples, const std::string& prior_spec,
                 std::optional<double> augment, int depth, const std::string& activation, const std::string& out,
                 const Shared& sh) {
  const ObservationSet obs = triples ? ObservationSet::from_triples_csv(observed)
                                     : ObservationSet::from_dense(read_dense_matrix(observed, true));
  FeaturePrior prior;
  if (prior_spec == "identity") {
    prior = augment ? normalize_prior(augment_identity(Eigen::MatrixXd::Identity(obs.cols(), obs.cols()), *augment))
                    : identity_prior(obs.cols());
  } else if (prior_spec.rfind("csv:", 0) == 0) {
    prior = method_output_prior(prior_spec.substr(4), augment);
  } else {
    throw DomainError("bad prior spec '" + prior_spec + "'; expected identity or csv:<path>");
  }
  if (prior.size() != obs.cols()) {
    std::ostringstream msg;
    msg << "prior has " << prior.size() << " columns but the matrix has " << obs.cols();
    throw ShapeError(msg.str());
  }
  CompletionReport rep;
  const Eigen::MatrixXd filled =
      complete_matrix(obs, prior, depth, Activation::parse(activation), solve_options(sh, 50, 1.0), &rep);
  write_dense_matrix(out, filled);
  std::fprintf(stderr, "factorizations %zu, ridge %.3g\n", rep.factorizations, rep.ridge);
  return 0;
}

bool is_png(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext == ".png";
}

int run_metrics(const std::string& pred, const std::string& truth, const std::string& folds, long n1, long n2,
                bool sqrt_denominator) {
  std::cout << "metric\tvalue\n";
  std::cout.precision(10);
  if (!folds.empty()) {
    FoldDifferences fd{read_dense_matrix(folds), n1, n2};
    const TStatistic t = corrected_t(fd, sqrt_denominator);
    std::cout << "t\t" << t.t << "\ndof\t" << t.dof << "\n";
  }
  if (pred.empty() && truth.empty()) return 0;
  if (pred.empty() || truth.empty()) throw DomainError("--pred and --truth go together");
  if (is_png(pred) != is_png(truth)) throw DomainError("--pred and --truth must both be PNG or both CSV");
  if (is_png(pred)) {
    const Image a = read_png(pred), b = read_png(truth);
    if (a.channels() != b.channels()) throw ShapeError("images have different channel counts");
    double p = 0.0, s = 0.0, mse = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
      if (a.planes[c].rows() != b.planes[c].rows() || a.planes[c].cols() != b.planes[c].cols())
        throw ShapeError("images have different sizes");
      mse += (a.planes[c] - b.planes[c]).squaredNorm() / static_cast<double>(a.planes[c].size());
      s += ssim(a.planes[c], b.planes[c]);
    }
    mse /= a.channels();
    p = mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / mse);
    std::cout << "psnr\t" << p << "\nssim\t" << s / a.channels() << "\n";
  } else {
    const Eigen::MatrixXd a = read_dense_matrix(pred), b = read_dense_matrix(truth);
    std::cout << "pearson_r\t" << uncentered_pearson_r(a, b) << "\n";
    std::cout << "mean_r2\t" << mean_r2(a, b) << "\n";
    std::cout << "mean_cosine\t" << mean_cosine(a, b) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix completion and image inpainting with neural tangent kernels"};
  app.require_subcommand(1);
  Shared sh;

  std::string arch_path, prior_spec = "analytic", out, size, kernel_path, in_path;
  std::optional<int> p2;
  int p2_required = 0;
  bool allow_degenerate = false;

  auto* pre = app.add_subcommand("precompute", "Build a CNTK from an arch file and prior and save it");
  pre->add_option("--arch", arch_path, "Arch file")->required();
  pre->add_option("--prior", prior_spec, "analytic[:rho] | uniform:<c>[:<high>] | identity | one-hot | meshgrid");
  pre->add_option("--size", size, "Override the arch input size, e.g. 32x32");
  pre->add_option("--p2", p2, "Expand to a 2^p2 square resolution and save the compact store");
  pre->add_flag("--allow-degenerate", allow_degenerate, "Accept priors with all-zero windows");
  pre->add_option("--out", out, "Output kernel file")->required();
  add_shared(pre, sh, false);

  auto* exp = app.add_subcommand("expand", "Expand a saved base kernel to a higher resolution");
  exp->add_option("--in", in_path, "Base kernel file")->required()->check(CLI::ExistingFile);
  exp->add_option("--p2", p2_required, "Target resolution 2^p2")->required();
  exp->add_option("--out", out, "Output compact kernel file")->required();
  add_shared(exp, sh, false);

  std::string image_path, mask_path, baseline_out;
  auto* inp = app.add_subcommand("inpaint", "Fill the masked pixels of a PNG by kernel regression");
  inp->add_option("--image", image_path, "Input PNG")->required()->check(CLI::ExistingFile);
  inp->add_option("--mask", mask_path, "Mask PNG, zero = missing")->required()->check(CLI::ExistingFile);
  inp->add_option("--kernel", kernel_path, "Kernel file from precompute/expand");
  inp->add_option("--arch", arch_path, "Arch file (kernel built in memory)");
  inp->add_option("--prior", prior_spec, "Prior spec when building from --arch");
  inp->add_option("--out", out, "Output PNG")->required();
  inp->add_option("--baseline-out", baseline_out, "Also write the mean-fill baseline here");
  add_shared(inp, sh, true);

  Eigen::Index pi = 0, pj = 0;
  double pct = 0.0;
  auto* heat = app.add_subcommand("heatmap", "Write K(i, j, :, :) as a grayscale PNG");
  heat->add_option("--kernel", kernel_path, "Kernel file");
  heat->add_option("--arch", arch_path, "Arch file (kernel built in memory)");
  heat->add_option("--prior", prior_spec, "Prior spec when building from --arch");
  heat->add_option("--size", size, "Resolution when building from --arch, e.g. 32x32");
  heat->add_option("-i,--row", pi, "Pixel row")->required();
  heat->add_option("-j,--col", pj, "Pixel column")->required();
  heat->add_option("--percentile", pct, "Zero values below this percentile")->check(CLI::Range(0.0, 99.999999));
  heat->add_option("--out", out, "Output PNG")->required();
  add_shared(heat, sh, false);

  std::string observed, activation = "relu", tab_prior = "identity";
  bool triples = false;
  std::optional<double> augment;
  int depth = 1;
  auto* comp = app.add_subcommand("complete", "Complete a partially observed matrix with the FC NTK");
  comp->add_option("--observed", observed, "Dense CSV with NaN/empty for missing, or triples with --triples")
      ->required()
      ->check(CLI::ExistingFile);
  comp->add_flag("--triples", triples, "Input is row,col,value with a header line");
  comp->add_option("--prior", tab_prior, "identity | csv:<path> (features x columns)");
  comp->add_option("--augment", augment, "Stack this multiple of the identity below the prior");
  comp->add_option("--depth", depth, "Hidden layers")->check(CLI::PositiveNumber);
  comp->add_option("--activation", activation, "relu | linear | leaky_relu[:slope]");
  comp->add_option("--out", out, "Output CSV")->required();
  add_shared(comp, sh, true);

  std::string pred, truth, folds;
  long n1 = 0, n2 = 0;
  bool sqrt_den = false;
  auto* met = app.add_subcommand("metrics", "Compare two PNGs or two CSVs; or a corrected t from fold differences");
  met->add_option("--pred", pred, "Prediction (PNG or CSV)");
  met->add_option("--truth", truth, "Ground truth (PNG or CSV)");
  met->add_option("--folds", folds, "k x r CSV of per-fold metric differences");
  met->add_option("--n1", n1, "Training set size");
  met->add_option("--n2", n2, "Test set size");
  met->add_flag("--sqrt-denominator", sqrt_den, "Take the square root of the variance term");
  add_shared(met, sh, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  set_max_threads(sh.threads);
  try {
    int rc = 0;
    const char* name = "";
    if (*pre) {
      name = "precompute";
      rc = run_precompute(arch_path, prior_spec, out, size, p2, allow_degenerate, sh);
    } else if (*exp) {
      name = "expand";
      rc = run_expand(in_path, p2_required, out);
    } else if (*inp) {
      name = "inpaint";
      rc = run_inpaint(image_path, mask_path, kernel_path, arch_path, prior_spec, out,
                       baseline_out, sh);
    } else if (*heat) {
      name = "heatmap";
      rc = run_heatmap(kernel_path, arch_path, prior_spec, size, pi, pj, pct, out, sh);
    } else if (*comp) {
      name = "complete";
      rc = run_complete(observed, triples, tab_prior, augment, depth, activation, out, sh);
    } else if (*met) {
      name = "metrics";
      rc = run_metrics(pred, truth, folds, n1, n2, sqrt_den);
    }
    if (!*met) resource_report(name, start);
    return rc;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
