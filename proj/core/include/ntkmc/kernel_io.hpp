#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "ntkmc/cntk.hpp"
#include "ntkmc/expand.hpp"

namespace ntkmc {

/// Kernel file layout (little-endian):
///   "NTKC" | u32 version | u32 flags | u32 s | u32 p2 | u32 rows | u32 cols
///   | f64 rho (NaN for explicit priors) | 32-byte arch hash | f64 payload.
/// Compact payload: period^2 * size^2 values (class a, b, row, col).
/// Full payload: (rows * cols)^2 values, row-major.
inline constexpr std::uint32_t kKernelFileVersion = 1;

struct KernelFileFlags {
  static constexpr std::uint32_t kCompact = 0x1;
  static constexpr std::uint32_t kFull = 0x2;
  static constexpr std::uint32_t kAnalyticPrior = 0x4;
  /// Built from an arch and prior that satisfy the expansion hypotheses.
  static constexpr std::uint32_t kExpandable = 0x8;
};

struct KernelFileHeader {
  std::uint32_t version = kKernelFileVersion;
  std::uint32_t flags = 0;
  std::uint32_t s = 0;
  /// log2 of the resolution when it is a square power of two, else 0.
  std::uint32_t p2 = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  double rho = 0.0;
  std::array<std::uint8_t, 32> arch_hash{};

  bool compact() const { return flags & KernelFileFlags::kCompact; }
  bool analytic() const { return flags & KernelFileFlags::kAnalyticPrior; }
  bool expandable() const { return flags & KernelFileFlags::kExpandable; }
};

struct LoadedKernel {
  KernelFileHeader header;
  std::optional<PixelKernel> full;
  std::optional<CompactKernel> compact;
};

/// Header for a full kernel built from `arch` and `prior`.
KernelFileHeader full_kernel_header(const ArchSpec& arch, const ImagePrior& prior);

void save_full_kernel(const std::string& path, const PixelKernel& kernel, KernelFileHeader header);
void save_compact_kernel(const std::string& path, const CompactKernel& kernel);
/// FormatError on bad magic, version, flags, or truncated payload.
LoadedKernel load_kernel(const std::string& path);

std::string hex(const std::array<std::uint8_t, 32>& digest);

}  // namespace ntkmc
