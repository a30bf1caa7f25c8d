#pragma once

#include <cstdint>

namespace diffvor {

// Minimal PCG32 (pcg_oneseq XSH-RR 64/32). The algorithm is pinned so that
// a seed produces the same point clouds on any platform.
class Pcg32 {
 public:
  static constexpr std::uint64_t kDefaultStream = 54u;

  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = kDefaultStream) {
    inc_ = (stream << 1u) | 1u;
    state_ = 0u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32u) | lo;
  }

  // 53-bit uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11u) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
};

}  // namespace diffvor
