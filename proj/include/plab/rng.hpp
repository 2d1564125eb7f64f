#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace plab {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

// Independent stream for (seed, a, b). Replicate r of cell c uses stream(seed, c, r).
inline Rng stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = detail::splitmix64(seed);
    h = detail::splitmix64(h ^ detail::splitmix64(a + 0x51ed27afULL));
    h = detail::splitmix64(h ^ detail::splitmix64(b + 0x2545f491ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(a),
                      static_cast<std::uint32_t>(b)};
    return Rng(seq);
}

template <class Gen>
inline std::size_t uniform_index(Gen& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

template <class Gen>
inline double uniform01(Gen& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

template <class Gen>
inline bool coin(Gen& rng, double p) {
    return uniform01(rng) < p;
}

// Poisson(lambda) conditioned on being >= 1, by inversion.
template <class Gen>
inline unsigned zero_truncated_poisson(Gen& rng, double lambda) {
    const double u = uniform01(rng);
    const double norm = -std::expm1(-lambda);
    double term = std::exp(-lambda) * lambda / norm;  // P(K = 1 | K >= 1)
    double cdf = term;
    unsigned k = 1;
    while (u > cdf && k < 1000) {
        ++k;
        term *= lambda / k;
        cdf += term;
    }
    return k;
}

}  // namespace plab
