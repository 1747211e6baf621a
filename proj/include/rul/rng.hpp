// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace rul {

// Counter-based generator: draw k of a stream is a fixed mix of
// (seed, stream label, k). Independently named streams never overlap, and the
// sequences do not depend on libstdc++ distribution internals, so every draw
// is stable across platforms and compilers.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  /// Unbiased integer in [0, n). Requires n >= 1.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal (Box-Muller; the spare draw is cached).
  double normal();

  /// Seeded Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// FNV-1a over a byte string; also used for config hashing.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace rul
