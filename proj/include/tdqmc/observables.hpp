#ifndef TDQMC_OBSERVABLES_HPP
#define TDQMC_OBSERVABLES_HPP

#include <vector>

#include "tdqmc/ensemble.hpp"
#include "tdqmc/grid.hpp"

namespace tdqmc {

// One-body reduced density matrix rho(r, r') on the grid, symmetric,
// unit trace under the h^d trace weight.
struct DensityMatrix {
    Grid grid;
    std::vector<double> values;  // n^d x n^d, row-major
    double trace_weight = 0.0;   // h^d

    std::size_t dim() const { return grid.size(); }
};

// rho = (1/M) sum_k phi_k (x) phi_k(x'). Materializes the full matrix;
// refuses when n^d exceeds the memory budget (use purity_streaming there).
// Throws on non-normalized input waves.
DensityMatrix reduced_density_matrix(const GuideSet& guides);

// S_L = 1 - Tr(rho^2) with the discrete double trace.
double linear_entropy(const DensityMatrix& rho);

// Tr(rho^2) = (1/M^2) sum_{k,l} <phi_k, phi_l>^2 without materializing rho.
double purity_streaming(const GuideSet& guides);

// Mean guide density (1/M) sum |phi_k|^2 (a probability density).
ScalarField guide_density_profile(const GuideSet& guides);

// Normalized histogram of walker positions on the grid (CIC assignment).
// Throws on an empty cloud.
ScalarField walker_density_profile(const WalkerCloud& cloud, const Grid& grid);

} // namespace tdqmc

#endif
