#ifndef TDQMC_ORACLE_HPP
#define TDQMC_ORACLE_HPP

#include <vector>

#include "tdqmc/grid.hpp"
#include "tdqmc/model.hpp"
#include "tdqmc/observables.hpp"

namespace tdqmc {

// Numerically exact many-body ground state on the full configuration-space
// grid (N*d axes); the reference for small systems.
struct ConfigWave {
    Grid grid;        // one-body grid; configuration space is its N*d power
    int n_particles = 0;
    std::vector<double> values;  // n^(N*d)

    double norm_weight() const;  // h^(N*d)
    std::size_t axes() const { return static_cast<std::size_t>(n_particles) * grid.dimension; }
};

// Imaginary-time relaxation of the full Hamiltonian from a symmetric product
// start, dimension-split backward Euler with a dtau ramp, converged when the
// energy changes by less than tol per step. Memory: (n^d)^N doubles; 1D N<=4
// at n=64 and 2D N=2 at n<=48 fit the budget.
ConfigWave exact_ground_state(const PhysicalParams& params, const Grid& grid,
                              double tol = 1e-8, int max_iters = 40000);

// Rayleigh quotient with the same second-order stencils as module grid.
double exact_energy(const ConfigWave& psi, const PhysicalParams& params);

// Largest deviation from bosonic exchange symmetry over adjacent
// particle transpositions.
double exchange_asymmetry(const ConfigWave& psi);

// rho(x, x') by contraction over the other N-1 particle coordinates.
DensityMatrix exact_one_body_rdm(const ConfigWave& psi);

} // namespace tdqmc

#endif
