#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace actionimg {

/// Generator whose stream depends only on the given keys, e.g.
/// (seed, sequence index, copy index).
inline std::mt19937_64 seeded_rng(std::initializer_list<std::uint64_t> keys) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * keys.size());
    for (std::uint64_t k : keys) {
        words.push_back(static_cast<std::uint32_t>(k));
        words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

}  // namespace actionimg
