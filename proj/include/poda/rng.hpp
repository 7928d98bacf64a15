#pragma once

#include <array>
#include <cstdint>

namespace poda {

/// xoshiro256** (Blackman & Vigna). The 256-bit state is filled from the
/// 64-bit seed with four successive splitmix64 outputs, so a seed fully
/// determines every draw on every platform.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();
  std::uint64_t operator()() { return next(); }

  /// Uniform integer in [0, bound) by rejection: draws r until
  /// r >= (2^64 - bound) % bound, then returns r % bound. bound must be > 0.
  std::uint64_t bounded(std::uint64_t bound);

  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

 private:
  std::array<std::uint64_t, 4> state_{};
};

/// One splitmix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace poda
