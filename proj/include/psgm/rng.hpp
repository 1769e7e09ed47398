#pragma once

#include "psgm/types.hpp"

#include <array>
#include <cstdint>

namespace psgm {

/// Seeded random stream (xoshiro256** seeded through splitmix64).
///
/// Every stochastic operation in the library takes one of these explicitly.
/// Uniform and normal variates are produced by hand-written transforms so a
/// given seed yields bit-identical streams on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the Marsaglia polar method.
  double normal();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  Vector normal_vector(Eigen::Index d);
  /// Uniform point in the Euclidean ball of the given radius around 0.
  Vector uniform_ball(Eigen::Index d, double radius);

  std::uint64_t seed() const { return seed_; }
  /// Number of 64-bit words consumed so far; doubles as a draw tag.
  std::uint64_t draws() const { return draws_; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t draws_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// Deterministic combination of two seeds (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace psgm
