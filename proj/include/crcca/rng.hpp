#pragma once

#include <cstdint>
#include <random>

namespace crcca {

// All randomness in the library flows through std::mt19937_64 with the
// explicit draw functions below. std::uniform_*_distribution is
// implementation-defined, so using it would break cross-platform
// reproducibility of seeded runs.

// Uniform double in [0, 1) with 53 mantissa bits.
inline double uniform_unit(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection sampling (no modulo bias).
inline std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
        r = gen();
    } while (r >= limit);
    return r % n;
}

// Standard normal via Box-Muller on the deterministic uniform draws.
inline double standard_normal(std::mt19937_64& gen) {
    double u1 = uniform_unit(gen);
    while (u1 <= 0.0) u1 = uniform_unit(gen);
    const double u2 = uniform_unit(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace crcca
