#pragma once

#include <cstddef>
#include <functional>

namespace ntkmc {

/// Caps the number of worker threads used by every parallel loop in the
/// library. 0 restores the default (hardware concurrency).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs body(begin, end) over contiguous chunks of [0, count). Chunks are
/// disjoint, so bodies that only write to their own range need no locking.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 64);

}  // namespace ntkmc
