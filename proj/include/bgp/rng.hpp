// rng.hpp — seedable RNG and portable draw helpers shared by the simulators.
#pragma once

#include <cstdint>
#include <random>

namespace bgp {

// All stochastic components use one generator type so that a (config, seed)
// pair pins the whole run. The name is recorded in trace metadata.
using Rng = std::mt19937_64;
inline constexpr const char* kRngName = "mt19937_64";

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Unbiased uniform integer in [0, bound); bound must be positive.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    const std::uint64_t reject_below = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= reject_below) return r % bound;
    }
}

}  // namespace bgp
