#pragma once

#include <cstdint>
#include <random>

namespace hammersley {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Child seed for (tag, index) under a parent seed. Distinct tags keep the
// sources, sinks and interior points of one replica on unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (tag * 0xd6e8feb86659fd93ULL));
    return splitmix64(h ^ (index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x48414d4du, 0x4d455253u};
    return Rng(seq);
}

namespace stream {
inline constexpr std::uint64_t points = 1;
inline constexpr std::uint64_t sources = 2;
inline constexpr std::uint64_t sinks = 3;
inline constexpr std::uint64_t left_sources = 4;
inline constexpr std::uint64_t region = 5;
inline constexpr std::uint64_t replica = 6;
inline constexpr std::uint64_t auxiliary = 7;
}  // namespace stream

}  // namespace hammersley
