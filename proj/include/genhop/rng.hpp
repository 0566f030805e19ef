#pragma once

#include <cstdint>
#include <random>

namespace genhop {

using Rng = std::mt19937_64;

/// Independent generator for stream `stream` of a master seed. Generation
/// gives sample i the stream i so results do not depend on scheduling.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

}  // namespace genhop
