#ifndef TDQMC_MODEL_HPP
#define TDQMC_MODEL_HPP

#include <cmath>
#include <span>

#include "tdqmc/errors.hpp"

namespace tdqmc {

// Harmonically trapped identical bosons in atomic units (hbar = m = 1,
// trap frequency 1). Interactions are soft-core Yukawa repulsion with
// screening a (1/bohr) and softening b (bohr).
struct PhysicalParams {
    int n_particles = 1;
    int dimension = 1;
    double screening = 0.0;   // a
    double softening = 1.0;   // b

    void validate() const {
        if (n_particles < 1) throw ConfigError("n_particles must be >= 1");
        if (dimension != 1 && dimension != 2) throw ConfigError("dimension must be 1 or 2");
        if (!(softening > 0.0)) throw ConfigError("softening b must be > 0");
        if (screening < 0.0) throw ConfigError("screening a must be >= 0");
    }
};

// Fig. 1 presets: long-range soft-core Coulomb and screened short-range.
inline PhysicalParams long_range(int n, int d) { return {n, d, 0.0, 1.0}; }
inline PhysicalParams short_range(int n, int d) { return {n, d, 3.0, 1.0}; }

// Trap potential |r|^2 / 2.
inline double core_potential(std::span<const double> r) {
    double r2 = 0.0;
    for (double c : r) r2 += c * c;
    return 0.5 * r2;
}

// Pair repulsion as a function of separation distance.
inline double pair_potential_r(double r, const PhysicalParams& p) {
    r = std::abs(r);
    return std::exp(-p.screening * r) / std::sqrt(r * r + p.softening * p.softening);
}

inline double pair_potential(std::span<const double> ri, std::span<const double> rj,
                             const PhysicalParams& p) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < ri.size(); ++c) {
        const double d = ri[c] - rj[c];
        r2 += d * d;
    }
    return pair_potential_r(std::sqrt(r2), p);
}

} // namespace tdqmc

#endif
