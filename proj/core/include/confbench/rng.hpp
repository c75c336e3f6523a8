#ifndef CONFBENCH_RNG_HPP
#define CONFBENCH_RNG_HPP

#include <cstdint>
#include <string_view>
#include <vector>

namespace confbench {

/// Advances a splitmix64 state and returns the next output:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent child seed from a base seed and a textual tag
/// (FNV-1a 64 hash of the tag mixed into a splitmix64 state). Used to give
/// each consumer of randomness (init, shuffles, dropout, ...) its own stream.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index = 0);

/// Deterministic xoshiro256** generator. The full update rule:
///
///   result = rotl(s1 * 5, 7) * 9
///   t  = s1 << 17
///   s2 ^= s0;  s3 ^= s1;  s1 ^= s2;  s0 ^= s3;  s2 ^= t
///   s3  = rotl(s3, 45)
///
/// with rotl(x, k) = (x << k) | (x >> (64 - k)). State is seeded by four
/// successive splitmix64 outputs, so identical seeds reproduce identical
/// streams across platforms and languages.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) built from the top 53 bits of next_u64().
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller on two uniform draws:
  ///   z = sqrt(-2 ln u1) * cos(2 pi u2),  u1 in (0, 1].
  double normal();

  /// Uniform integer in [0, n) via the 128-bit multiply-shift reduction
  ///   (next_u64() * n) >> 64.
  std::uint64_t below(std::uint64_t n);

  /// Fisher-Yates shuffle driven by below().
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  /// Random permutation of {0, ..., n-1}.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t state_[4];
};

}  // namespace confbench

#endif  // CONFBENCH_RNG_HPP
