#pragma once

#include <cstddef>
#include <cstdint>

namespace szlab {

/// Worker-count context threaded through every data-parallel kernel.
/// Kernels never consult global OpenMP state; results depend only on the
/// inputs (and, for Monte Carlo, on the root seed), never on `workers`.
struct Parallelism {
  int workers = 1;

  static Parallelism serial() { return {1}; }
  /// Honors SZLAB_WORKERS when `requested` is 0.
  static Parallelism resolve(int requested);
};

/// SplitMix64 step. Used to derive independent per-block RNG seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for stream `stream` under root seed `root`. Fixed-size sample blocks
/// are seeded by block index, so sample streams are independent of scheduling.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

/// Rows per Monte Carlo block.
inline constexpr std::size_t kSampleBlock = 256;

}  // namespace szlab
