#ifndef TDQMC_ENSEMBLE_HPP
#define TDQMC_ENSEMBLE_HPP

#include <cmath>
#include <span>
#include <vector>

#include "tdqmc/grid.hpp"
#include "tdqmc/model.hpp"

namespace tdqmc {

// Effective-potential regime: kernel convolution (standard), the sigma->0
// local-pairing limit, or the sigma->infinity mean-field (Hartree) limit.
enum class RunMode { standard, local_limit, hartree };

// M walker positions for one particle ensemble, walker-major layout.
struct WalkerCloud {
    int particle_index = 0;
    int dimension = 1;
    std::vector<double> positions;  // M * d
    double sample_stddev = 0.0;     // s_i
    double nonlocal_length = 0.0;   // sigma_i

    int walker_count() const { return static_cast<int>(positions.size()) / dimension; }
    std::span<const double> walker(int k) const {
        return {positions.data() + static_cast<std::size_t>(k) * dimension,
                static_cast<std::size_t>(dimension)};
    }
    std::span<double> walker_mut(int k) {
        return {positions.data() + static_cast<std::size_t>(k) * dimension,
                static_cast<std::size_t>(dimension)};
    }
};

// One guide wave per walker of a particle ensemble.
struct GuideSet {
    int particle_index = 0;
    std::vector<ScalarField> waves;
};

// Annealed noise amplitude A(tau) = A0 * (1 + tau/tau_c)^(-p).
struct NoiseSchedule {
    double base_amplitude = 1.0;
    double decay_exponent = 0.2;
    double reference_time = 1.0;
};

double noise_amplitude(const NoiseSchedule& sched, double tau);

// Gaussian kernel exp(-|r_l - r_k|^2 / (2 sigma^2)).
double kernel_weight(std::span<const double> r_l, std::span<const double> r_k, double sigma);

// Z_j^k = sum_l K(r_j^l, r_j^k, sigma_j); >= 1 since the l = k term is 1.
double partition_weight(const WalkerCloud& cloud, int k);

// Exact per-walker effective potential on the grid: for each node r,
// sum_{j != i} (1/Z_j^k) sum_l V_ee(r, r_j^l) K(r_j^l, r_j^k, sigma_j).
// O(n^d * M * N); the solver uses binned tables at production scale and this
// exact form in limit modes and tests.
ScalarField effective_potential_field(int i, int k, const std::vector<WalkerCloud>& clouds,
                                      const PhysicalParams& params, const Grid& grid,
                                      RunMode mode = RunMode::standard);

// (hbar/m) grad(phi)/phi at the walker position.
ProbeResult drift_velocity(const ScalarField& wave, std::span<const double> position);

// Euler-Maruyama move: position + drift*dtau + amplitude*eta*sqrt(dtau).
// eta holds d standard-normal deviates. In drift-free variational mode the
// caller passes a zero drift.
void diffuse_step(std::span<double> position, std::span<const double> drift, double dtau,
                  double amplitude, std::span<const double> eta);

// Per-dimension RMS spread about the centroid:
// s = sqrt( (1/(M d)) sum_k |r^k - rbar|^2 ). Requires M >= 2.
double sample_stddev(const WalkerCloud& cloud);

} // namespace tdqmc

#endif
