#include "tdqmc/ensemble.hpp"

#include <algorithm>
#include <cmath>

namespace tdqmc {

double noise_amplitude(const NoiseSchedule& sched, double tau) {
    if (tau < 0.0) throw ConfigError("tau must be >= 0");
    if (!(sched.reference_time > 0.0)) throw ConfigError("reference_time must be > 0");
    return sched.base_amplitude *
           std::pow(1.0 + tau / sched.reference_time, -sched.decay_exponent);
}

double kernel_weight(std::span<const double> r_l, std::span<const double> r_k, double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("kernel sigma must be > 0");
    double d2 = 0.0;
    for (std::size_t c = 0; c < r_l.size(); ++c) {
        const double d = r_l[c] - r_k[c];
        d2 += d * d;
    }
    return std::exp(-0.5 * d2 / (sigma * sigma));
}

double partition_weight(const WalkerCloud& cloud, int k) {
    const int M = cloud.walker_count();
    const auto rk = cloud.walker(k);
    double z = 0.0;
    for (int l = 0; l < M; ++l) z += kernel_weight(cloud.walker(l), rk, cloud.nonlocal_length);
    return z;
}

ScalarField effective_potential_field(int i, int k, const std::vector<WalkerCloud>& clouds,
                                      const PhysicalParams& params, const Grid& grid,
                                      RunMode mode) {
    const int n = grid.points_per_axis;
    const int N = static_cast<int>(clouds.size());
    const int M0 = clouds.empty() ? 0 : clouds[0].walker_count();
    for (const auto& c : clouds)
        if (c.walker_count() != M0) throw ConfigError("mismatched walker counts across clouds");

    ScalarField out = ScalarField::zeros(grid);
    std::vector<double> node(2, 0.0);
    std::vector<double> weights;
    for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        const WalkerCloud& cj = clouds[j];
        const int M = cj.walker_count();
        const auto rk = cj.walker(k);

        if (mode == RunMode::local_limit) {
            // single local source at the k-paired walker
            if (grid.dimension == 1) {
                for (int ix = 0; ix < n; ++ix) {
                    node[0] = grid.coord(ix);
                    out.values[ix] += pair_potential({node.data(), 1}, rk, params);
                }
            } else {
                for (int iy = 0; iy < n; ++iy)
                    for (int ix = 0; ix < n; ++ix) {
                        node[0] = grid.coord(ix);
                        node[1] = grid.coord(iy);
                        out.values[static_cast<std::size_t>(iy) * n + ix] +=
                            pair_potential({node.data(), 2}, rk, params);
                    }
            }
            continue;
        }

        weights.assign(M, 1.0 / M);
        if (mode == RunMode::standard) {
            double z = 0.0;
            for (int l = 0; l < M; ++l) {
                weights[l] = kernel_weight(cj.walker(l), rk, cj.nonlocal_length);
                z += weights[l];
            }
            for (double& w : weights) w /= z;
        }
        for (int l = 0; l < M; ++l) {
            const auto rl = cj.walker(l);
            if (grid.dimension == 1) {
                for (int ix = 0; ix < n; ++ix) {
                    node[0] = grid.coord(ix);
                    out.values[ix] += weights[l] * pair_potential({node.data(), 1}, rl, params);
                }
            } else {
                for (int iy = 0; iy < n; ++iy)
                    for (int ix = 0; ix < n; ++ix) {
                        node[0] = grid.coord(ix);
                        node[1] = grid.coord(iy);
                        out.values[static_cast<std::size_t>(iy) * n + ix] +=
                            weights[l] * pair_potential({node.data(), 2}, rl, params);
                    }
            }
        }
    }
    return out;
}

ProbeResult drift_velocity(const ScalarField& wave, std::span<const double> position) {
    return probe_log_gradient(wave, position);  // hbar = m = 1
}

void diffuse_step(std::span<double> position, std::span<const double> drift, double dtau,
                  double amplitude, std::span<const double> eta) {
    if (!(dtau > 0.0)) throw ConfigError("dtau must be > 0");
    if (amplitude < 0.0) throw ConfigError("noise amplitude must be >= 0");
    const double root_dt = std::sqrt(dtau);
    for (std::size_t c = 0; c < position.size(); ++c)
        position[c] += drift[c] * dtau + amplitude * eta[c] * root_dt;
}

double sample_stddev(const WalkerCloud& cloud) {
    const int M = cloud.walker_count();
    if (M < 2) throw ConfigError("sample_stddev needs at least 2 walkers");
    const int d = cloud.dimension;
    double mean[2] = {0.0, 0.0};
    for (int k = 0; k < M; ++k) {
        const auto r = cloud.walker(k);
        for (int c = 0; c < d; ++c) mean[c] += r[c];
    }
    for (int c = 0; c < d; ++c) mean[c] /= M;
    double acc = 0.0;
    for (int k = 0; k < M; ++k) {
        const auto r = cloud.walker(k);
        for (int c = 0; c < d; ++c) {
            const double dev = r[c] - mean[c];
            acc += dev * dev;
        }
    }
    return std::sqrt(acc / (static_cast<double>(M) * d));
}

} // namespace tdqmc
