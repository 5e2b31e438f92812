#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "elmpi/core_linalg.hpp"

namespace elmpi {

/// Seeded deterministic RNG. mt19937_64 is fully specified by the standard
/// and normals go through the library's own probit, so identical seeds give
/// bit-identical draws on every platform.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0,1).
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via probit(uniform01()).
  double normal() { return detail::probit(uniform01()); }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 step; used to derive independent sub-seeds from one base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Deterministic Fisher–Yates permutation of [0, n).
std::vector<Index> seeded_permutation(Index n, std::uint64_t seed);

}  // namespace elmpi
