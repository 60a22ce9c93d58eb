#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace stcr {

using Rng = std::mt19937_64;

/// Independent stream for (seed, tags...), e.g. derive_rng(seed, {epoch, clip}).
inline Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {}) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  for (std::uint64_t tag : tags) {
    words.push_back(static_cast<std::uint32_t>(tag));
    words.push_back(static_cast<std::uint32_t>(tag >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace stcr
