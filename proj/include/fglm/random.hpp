#pragma once

#include <cstdint>
#include <random>

namespace fglm {

using Rng = std::mt19937_64;

/// splitmix64 finalizer. Used to derive statistically independent stream
/// seeds from (master seed, index) pairs.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for replication `rep` at grid position `index`: master XOR splitmix(index, rep).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t rep) noexcept {
    return master ^ splitmix64((index << 32) ^ rep);
}

}  // namespace fglm
