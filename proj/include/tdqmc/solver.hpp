#ifndef TDQMC_SOLVER_HPP
#define TDQMC_SOLVER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tdqmc/ensemble.hpp"
#include "tdqmc/grid.hpp"
#include "tdqmc/model.hpp"

namespace tdqmc {

struct RunConfig {
    PhysicalParams params;
    Grid grid;
    int walkers = 1000;
    double dtau = 0.005;
    int steps = 4000;
    double alpha = 1.0;
    RunMode mode = RunMode::standard;
    NoiseSchedule schedule;
    bool drift_enabled = true;
    bool interaction_enabled = true;
    // Force the exact O(n^d M N) effective-potential evaluation instead of
    // the binned tables; used by limit-consistency tests at small M.
    bool exact_potential = false;
    std::uint64_t seed = 1;
    int energy_window = 0;  // 0 -> last 20% of steps
    int threads = 0;        // 0 = library default

    void validate() const;
    int window_steps() const;
};

struct StepStats {
    double tau = 0.0;
    double energy = 0.0;
    double energy_err = 0.0;  // walker-ensemble standard error this step
    double s_mean = 0.0;
    double sigma_mean = 0.0;
    int clamped = 0;
    int node_excluded = 0;
};

struct RunResult {
    double energy = 0.0;
    double energy_err = 0.0;  // standard error of the windowed trace
    std::vector<StepStats> trace;
    std::vector<WalkerCloud> clouds;
    std::vector<GuideSet> guides;
    std::vector<double> s;      // per particle, final step
    std::vector<double> sigma;  // per particle, final step
    double linear_entropy = 0.0;
    long clamp_count = 0;
    long node_count = 0;
    double clamp_fraction = 0.0;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    bool validation_ok = true;
    std::string validation_message;
};

// Eq.-(8) summand for walker k: one-body probed kinetic + trap terms plus the
// true pair interaction at the walker configuration. Sets *excluded when a
// guide value is below the node guard at its walker.
double local_energy(int k, const std::vector<WalkerCloud>& clouds,
                    const std::vector<GuideSet>& guides, const PhysicalParams& params,
                    bool* excluded);

struct EnergyEstimate {
    double energy = 0.0;
    double stderr_ = 0.0;
    int excluded = 0;
    bool reliable = true;  // false when >10% of walkers were node-excluded
};

EnergyEstimate total_energy(const std::vector<WalkerCloud>& clouds,
                            const std::vector<GuideSet>& guides, const PhysicalParams& params);

// The TDQMC relaxation loop. Per step: snapshot clouds; recompute s and
// sigma = alpha*s; rebuild each walker's effective potential and advance its
// guide wave one imaginary-time step; move walkers by drift-diffusion with
// the annealed noise amplitude; record the energy estimator.
RunResult relax_ground_state(const RunConfig& config);

struct ScanRow {
    double alpha = 0.0;
    double energy = 0.0;
    double energy_err = 0.0;
    double entropy = 0.0;
    double s = 0.0;
    double sigma = 0.0;
};

struct ScanResult {
    std::vector<ScanRow> rows;
    int opt_index = 0;
    double alpha_opt = 0.0;
    bool alpha_meaningful = true;  // false for N = 1 (no j != i terms)
    bool nonconvex = false;
    std::string note;
};

// Runs relax_ground_state per alpha. Common random numbers by default (one
// seed across the scan); independent seeds otherwise. Ties break toward
// smaller alpha; multiple minima beyond noise are reported, not resolved.
ScanResult alpha_scan(const RunConfig& base, const std::vector<double>& alphas,
                      bool common_seed = true);

// sigma -> infinity: one guide wave per particle, uniform 1/M weights.
RunResult hartree_limit_run(RunConfig config);

// sigma -> 0: local pair potential at the k-paired walkers, no kernels.
RunResult local_limit_run(RunConfig config);

} // namespace tdqmc

#endif
