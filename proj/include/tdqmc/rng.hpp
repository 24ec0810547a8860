#ifndef TDQMC_RNG_HPP
#define TDQMC_RNG_HPP

#include <cmath>
#include <cstdint>

namespace tdqmc {

// Counter-based random streams: every deviate is a pure function of
// (seed, step, particle, walker, draw). Walker trajectories are therefore
// bit-reproducible for a given seed regardless of thread count or schedule.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                             std::uint64_t c) {
    std::uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

// Uniform in (0, 1]: guards the log in Box-Muller.
inline double uniform_pos(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

// Standard-normal pair via Box-Muller from one 64-bit key.
inline void normal_pair(std::uint64_t key, double& z0, double& z1) {
    const std::uint64_t u_bits = splitmix64(key ^ 0x452821e638d01377ULL);
    const std::uint64_t v_bits = splitmix64(key ^ 0xc0ac29b7c97c50ddULL);
    const double u = uniform_pos(u_bits);
    const double v = static_cast<double>(v_bits >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u));
    z0 = r * std::cos(2.0 * M_PI * v);
    z1 = r * std::sin(2.0 * M_PI * v);
}

// Convenience handle bound to one run seed.
struct NormalSource {
    std::uint64_t seed = 1;

    // Deterministic normal deviates for (step, particle, walker); draws the
    // d components of one walker move from a single key.
    void walker_pair(std::uint64_t step, std::uint64_t particle, std::uint64_t walker,
                     double& z0, double& z1) const {
        normal_pair(mix_key(seed, step, particle, walker), z0, z1);
    }
};

} // namespace tdqmc

#endif
