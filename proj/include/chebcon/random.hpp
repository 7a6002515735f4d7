#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace chebcon {

// Engine seeded from a tuple of 64-bit words, e.g. {seed, round, stream}.
// Distinct tuples give independent streams; equal tuples give equal streams.
inline std::mt19937_64 make_engine(std::initializer_list<std::uint64_t> words) {
  std::vector<std::uint32_t> parts;
  parts.reserve(2 * words.size());
  for (std::uint64_t w : words) {
    parts.push_back(static_cast<std::uint32_t>(w & 0xffffffffu));
    parts.push_back(static_cast<std::uint32_t>(w >> 32));
  }
  std::seed_seq seq(parts.begin(), parts.end());
  return std::mt19937_64(seq);
}

// Stream tags keep the per-purpose engines apart.
enum class Stream : std::uint64_t {
  Graph = 0x6772617068ULL,
  Agent = 0x6167656e74ULL,
  Objective = 0x6f626a6563ULL,
  Knowledge = 0x6b6e6f77ULL,
  Guess = 0x6775657373ULL,
  Trial = 0x747269616cULL,
};

inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

}  // namespace chebcon
