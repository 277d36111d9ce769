#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "scorelab/core/linalg.hpp"

namespace scorelab {

using Seed = std::uint64_t;
using Engine = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent substream seed: seed_i = mix(master, i).
inline constexpr Seed mix_seed(Seed master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline constexpr std::uint64_t tag(std::string_view name) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Named substream: (module tag, index).
inline constexpr Seed substream(Seed master, std::string_view name, std::uint64_t index = 0) noexcept {
    return mix_seed(mix_seed(master, tag(name)), index);
}

inline Engine make_engine(Seed seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Engine(seq);
}

inline Vector standard_normal(Engine& eng, Eigen::Index dim) {
    std::normal_distribution<double> normal;
    Vector z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z(i) = normal(eng);
    return z;
}

}  // namespace scorelab
