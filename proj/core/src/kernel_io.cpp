#include "ntkmc/kernel_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "ntkmc/errors.hpp"

namespace ntkmc {

namespace {

constexpr char kMagic[4] = {'N', 'T', 'K', 'C'};

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    U out = 0;
    for (std::size_t k = 0; k < sizeof(U); ++k) out = static_cast<U>((out << 8) | ((v >> (8 * k)) & 0xff));
    return out;
  }
}

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw FormatError("cannot write '" + path + "'");
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u32(std::uint32_t v) {
    v = to_little(v);
    bytes(&v, 4);
  }
  void f64(double d) {
    auto v = to_little(std::bit_cast<std::uint64_t>(d));
    bytes(&v, 8);
  }
  void finish() {
    out_.flush();
    if (!out_) throw FormatError("failed writing '" + path_ + "'");
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw FormatError("cannot open kernel file '" + path + "'");
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("'" + path_ + "' is truncated");
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    bytes(&v, 4);
    return to_little(v);
  }
  double f64() {
    std::uint64_t v = 0;
    bytes(&v, 8);
    return std::bit_cast<double>(to_little(v));
  }
  void f64_array(double* dst, std::size_t n) {
    bytes(dst, n * 8);
    if constexpr (std::endian::native != std::endian::little)
      for (std::size_t k = 0; k < n; ++k) dst[k] = std::bit_cast<double>(to_little(std::bit_cast<std::uint64_t>(dst[k])));
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::ifstream in_;
  std::string path_;
};

void write_header(Writer& w, const KernelFileHeader& h) {
  w.bytes(kMagic, 4);
  w.u32(h.version);
  w.u32(h.flags);
  w.u32(h.s);
  w.u32(h.p2);
  w.u32(h.rows);
  w.u32(h.cols);
  w.f64(h.rho);
  w.bytes(h.arch_hash.data(), 32);
}

std::uint32_t log2_if_square_pow2(Eigen::Index rows, Eigen::Index cols) {
  if (rows != cols || rows <= 0 || (rows & (rows - 1)) != 0) return 0;
  std::uint32_t k = 0;
  while ((Eigen::Index{1} << k) < rows) ++k;
  return k;
}

}  // namespace

std::string hex(const std::array<std::uint8_t, 32>& digest) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (auto b : digest) {
    out += digits[b >> 4];
    out += digits[b & 0xf];
  }
  return out;
}

KernelFileHeader full_kernel_header(const ArchSpec& arch, const ImagePrior& prior) {
  KernelFileHeader h;
  h.flags = KernelFileFlags::kFull;
  h.s = static_cast<std::uint32_t>(arch.downsample_count());
  h.rows = static_cast<std::uint32_t>(arch.rows());
  h.cols = static_cast<std::uint32_t>(arch.cols());
  h.p2 = log2_if_square_pow2(arch.rows(), arch.cols());
  h.arch_hash = arch.hash();
  if (prior.is_analytic()) {
    h.flags |= KernelFileFlags::kAnalyticPrior;
    h.rho = prior.rho();
    bool ok = true;
    try {
      check_expandable(arch, prior);
    } catch (const UnsupportedError&) {
      ok = false;
    }
    if (ok) h.flags |= KernelFileFlags::kExpandable;
  } else {
    h.rho = std::numeric_limits<double>::quiet_NaN();
  }
  return h;
}

void save_full_kernel(const std::string& path, const PixelKernel& kernel, KernelFileHeader header) {
  header.flags = (header.flags & ~KernelFileFlags::kCompact) | KernelFileFlags::kFull;
  header.rows = static_cast<std::uint32_t>(kernel.rows);
  header.cols = static_cast<std::uint32_t>(kernel.cols);
  const Eigen::Index n = kernel.rows * kernel.cols;
  if (kernel.matrix.rows() != n || kernel.matrix.cols() != n) throw ShapeError("kernel matrix does not match its size");
  Writer w(path);
  write_header(w, header);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) w.f64(kernel.matrix(r, c));
  w.finish();
}

void save_compact_kernel(const std::string& path, const CompactKernel& kernel) {
  KernelFileHeader h;
  h.flags = KernelFileFlags::kCompact | KernelFileFlags::kAnalyticPrior | KernelFileFlags::kExpandable;
  h.s = static_cast<std::uint32_t>(kernel.s());
  h.p2 = log2_if_square_pow2(kernel.size(), kernel.size());
  h.rows = h.cols = static_cast<std::uint32_t>(kernel.size());
  h.rho = kernel.rho;
  h.arch_hash = kernel.arch_hash;
  Writer w(path);
  write_header(w, h);
  for (double v : kernel.data()) w.f64(v);
  w.finish();
}

LoadedKernel load_kernel(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("'" + path + "' is not a kernel file (bad magic)");
  LoadedKernel out;
  auto& h = out.header;
  h.version = r.u32();
  if (h.version != kKernelFileVersion)
    throw FormatError("'" + path + "' has unsupported kernel file version " + std::to_string(h.version));
  h.flags = r.u32();
  h.s = r.u32();
  h.p2 = r.u32();
  h.rows = r.u32();
  h.cols = r.u32();
  h.rho = r.f64();
  r.bytes(h.arch_hash.data(), 32);
  const bool compact = h.flags & KernelFileFlags::kCompact;
  const bool full = h.flags & KernelFileFlags::kFull;
  if (compact == full) throw FormatError("'" + path + "' must be exactly one of compact or full");
  if (h.rows == 0 || h.cols == 0 || h.rows > 65536 || h.cols > 65536)
    throw FormatError("'" + path + "' has implausible dimensions");
  if (full) {
    const Eigen::Index n = static_cast<Eigen::Index>(h.rows) * h.cols;
    PixelKernel k{static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols), Eigen::MatrixXd(n, n)};
    // Payload is row-major; the kernel is symmetric in exact arithmetic but
    // the bytes are restored verbatim.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rowmajor(n, n);
    r.f64_array(rowmajor.data(), static_cast<std::size_t>(n * n));
    k.matrix = rowmajor;
    out.full = std::move(k);
  } else {
    if (h.rows != h.cols || h.s > 20 || h.p2 > 30 || (std::uint64_t{1} << h.p2) != h.rows)
      throw FormatError("'" + path + "' has an inconsistent compact header");
    CompactKernel k(static_cast<int>(h.s), static_cast<Eigen::Index>(h.rows));
    r.f64_array(k.data().data(), k.data().size());
    k.arch_hash = h.arch_hash;
    k.rho = h.rho;
    out.compact = std::move(k);
  }
  if (!r.at_end()) throw FormatError("'" + path + "' has trailing bytes");
  return out;
}

}  // namespace ntkmc
