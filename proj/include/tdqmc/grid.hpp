#ifndef TDQMC_GRID_HPP
#define TDQMC_GRID_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "tdqmc/errors.hpp"

namespace tdqmc {

// Uniform grid on the symmetric domain [-L, L]^d with Dirichlet boundaries.
struct Grid {
    double half_extent = 8.0;   // L (bohr)
    int points_per_axis = 256;  // n
    int dimension = 1;          // d

    double spacing() const { return 2.0 * half_extent / (points_per_axis - 1); }
    std::size_t size() const {
        std::size_t s = 1;
        for (int ax = 0; ax < dimension; ++ax) s *= static_cast<std::size_t>(points_per_axis);
        return s;
    }
    double coord(int idx) const { return -half_extent + idx * spacing(); }

    void validate() const {
        if (dimension != 1 && dimension != 2) throw ConfigError("grid dimension must be 1 or 2");
        if (points_per_axis < 16) throw ConfigError("grid needs at least 16 points per axis");
        if (!(half_extent > 0.0)) throw ConfigError("grid half_extent must be > 0");
    }
    bool operator==(const Grid&) const = default;
};

// Real-valued one-body field sampled on a grid (a guide wave or a potential).
// Ground-state guide waves stay real in imaginary time.
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    static ScalarField zeros(const Grid& g) { return {g, std::vector<double>(g.size(), 0.0)}; }
};

// Second-order central-difference Laplacian, zero outside the domain.
ScalarField laplacian_apply(const ScalarField& field);

// Scale so that h^d * sum(v^2) = 1. Throws CollapsedWave on zero norm.
void normalize(ScalarField& field);
double squared_norm(const ScalarField& field);  // h^d * sum(v^2)

// One backward-Euler step of exp(-H dtau) with H = -1/2 laplacian + potential,
// followed by renormalization. The fixed point is the ground state of the
// discretized H. 1D uses a tridiagonal solve; 2D a warm-started conjugate
// gradient on the five-point stencil.
void imaginary_time_step(ScalarField& field, const ScalarField& potential, double dtau);

// Rayleigh quotient <phi|H|phi> / <phi|phi> with the same stencil.
double rayleigh_energy(const ScalarField& field, const ScalarField& potential);

struct ProbeResult {
    double grad[2] = {0.0, 0.0};  // grad(phi)/phi components
    bool clamped = false;         // probe position clamped to the domain edge
    bool node = false;            // |phi| below 1e-12 at the probe point
};

// grad(phi)/phi at an off-grid position: multilinear interpolation of the
// finite-difference gradient field divided by the interpolated value.
ProbeResult probe_log_gradient(const ScalarField& field, std::span<const double> position);

// -1/2 laplacian(phi)/phi at an off-grid position, probed the same way.
// Sets *node when |phi| < 1e-12 there.
double probe_kinetic(const ScalarField& field, std::span<const double> position, bool* node);

// Interpolated field value at an off-grid position (multilinear).
double probe_value(const ScalarField& field, std::span<const double> position);

} // namespace tdqmc

#endif
