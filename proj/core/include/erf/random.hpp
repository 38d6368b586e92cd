#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace erforest {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Independent stream seed for (seed, stream). Used to give each tree and each
// training iteration its own generator so results do not depend on the order
// in which work is scheduled.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Portable generator: the raw mt19937_64 sequence is fixed by the standard,
// and the helpers below avoid the implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased. n must be positive.
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace erforest
