#pragma once

#include <array>
#include <cstdint>

namespace annealab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Pure function
/// of (counter, key); no state, so any particle/tick can be drawn in any order.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

  static constexpr Counter generate(Counter c, Key k) {
#pragma GCC unroll 10
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * c[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += kWeylA;
      k[1] += kWeylB;
    }
    return c;
  }
};

/// Uniform double in (0, 1) from 52 bits of two words. With 53 bits the
/// largest value would round up to 1.
constexpr double unit_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 20) | (lo >> 12);
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

/// Two uniforms for particle `particle` at Metropolis tick `tick`.
struct UniformPair {
  double first = 0.0;
  double second = 0.0;
};

constexpr UniformPair philox_uniforms(std::uint64_t seed, std::uint64_t particle,
                                      std::uint64_t tick) {
  const auto w = Philox4x32::generate(
      {static_cast<std::uint32_t>(tick), static_cast<std::uint32_t>(tick >> 32),
       static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(particle >> 32)},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  return {unit_open(w[0], w[1]), unit_open(w[2], w[3])};
}

/// Tick index reserved for initial-state draws; annealing never reaches it.
inline constexpr std::uint64_t kInitialDrawTick = ~std::uint64_t{0};

}  // namespace annealab
