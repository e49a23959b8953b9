#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace mspi {

// splitmix64 finalizer. Used to expand seeds and to derive independent
// streams from (seed, index) pairs.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// xoshiro256** generator (Blackman & Vigna) with every transform to
/// doubles implemented here, so a seed yields the same stream on every
/// platform and standard library.
///
/// State is the four 64-bit words plus one cached normal deviate from the
/// Marsaglia polar method.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for a sub-task (tree b, replication r, ...).
  static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return Rng(mix_seed(seed, a, b));
  }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, n). Unbiased (rejection sampling). n > 0.
  std::size_t index(std::size_t n);
  /// Standard normal deviate.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mspi
