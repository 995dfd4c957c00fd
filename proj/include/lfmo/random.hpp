#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace lfmo {

using rng_t = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a master seed and a path of counters.
/// Distinct paths give statistically independent streams, and the mapping
/// does not depend on scheduling, so results are worker-count independent.
inline constexpr std::uint64_t derive_seed(std::uint64_t master,
                                           std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = splitmix64(master);
    for (auto c : path) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
    return h;
}

inline rng_t make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return rng_t{derive_seed(master, path)};
}

// Splits off an independent child stream, consuming one draw from the parent.
inline rng_t split(rng_t& parent) { return rng_t{splitmix64(parent())}; }

// Uniform on (0, 1].
inline double uniform_open0(rng_t& rng) {
    return 1.0 - std::generate_canonical<double, 64>(rng);
}

inline double standard_exponential(rng_t& rng) { return -std::log(uniform_open0(rng)); }

}  // namespace lfmo
