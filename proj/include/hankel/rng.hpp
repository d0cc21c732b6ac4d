#pragma once

#include <cstdint>
#include <random>

namespace hankel {

using Rng = std::mt19937_64;

/// Independent generator for logical stream `stream` of a run seeded with `seed`.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6a09e667u};
  return Rng(seq);
}

/// A non-zero seed from the system entropy source; used when the caller passes 0.
inline std::uint64_t entropy_seed() {
  std::random_device rd;
  std::uint64_t s = 0;
  while (s == 0) s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  return s;
}

}  // namespace hankel
