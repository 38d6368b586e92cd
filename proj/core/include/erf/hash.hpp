#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string_view>

namespace erforest {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// FNV-1a over the little-endian bit patterns of the values.
inline std::uint64_t digest(std::span<const double> values) noexcept {
  std::uint64_t h = kFnvOffset;
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= kFnvPrime;
    }
  }
  return h;
}

}  // namespace erforest
