#include "tdqmc/solver.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "tdqmc/effective.hpp"
#include "tdqmc/observables.hpp"
#include "tdqmc/rng.hpp"

namespace tdqmc {

void RunConfig::validate() const {
    params.validate();
    grid.validate();
    if (grid.dimension != params.dimension)
        throw ConfigError("grid and params dimension mismatch");
    if (walkers < 2) throw ConfigError("need at least 2 walkers");
    if (!(dtau > 0.0)) throw ConfigError("dtau must be > 0");
    if (steps < 2) throw ConfigError("need at least 2 steps");
    if (mode == RunMode::standard && !(alpha > 0.0))
        throw ConfigError("alpha must be > 0 in standard mode");
    if (steps * dtau < 10.0 * schedule.reference_time - 1e-12)
        throw ConfigError("steps*dtau must be >= 10*reference_time (annealing must decay)");
    if (energy_window < 0 || energy_window > steps)
        throw ConfigError("energy_window out of range");
}

int RunConfig::window_steps() const {
    if (energy_window > 0) return energy_window;
    return std::max(2, steps / 5);
}

double local_energy(int k, const std::vector<WalkerCloud>& clouds,
                    const std::vector<GuideSet>& guides, const PhysicalParams& params,
                    bool* excluded) {
    const int N = static_cast<int>(clouds.size());
    if (excluded) *excluded = false;
    double e = 0.0;
    for (int i = 0; i < N; ++i) {
        const auto r = clouds[i].walker(k);
        // Hartree mode keeps a single shared wave per particle
        const int wk = (guides[i].waves.size() == 1) ? 0 : k;
        bool node = false;
        e += probe_kinetic(guides[i].waves[wk], r, &node);
        if (node) {
            if (excluded) *excluded = true;
            return 0.0;
        }
        e += core_potential(r);
    }
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < i; ++j)
            e += pair_potential(clouds[i].walker(k), clouds[j].walker(k), params);
    return e;
}

EnergyEstimate total_energy(const std::vector<WalkerCloud>& clouds,
                            const std::vector<GuideSet>& guides, const PhysicalParams& params) {
    const int M = clouds.empty() ? 0 : clouds[0].walker_count();
    EnergyEstimate est;
    double sum = 0.0, sum2 = 0.0;
    int included = 0;
    for (int k = 0; k < M; ++k) {
        bool excl = false;
        const double e = local_energy(k, clouds, guides, params, &excl);
        if (excl) {
            ++est.excluded;
            continue;
        }
        sum += e;
        sum2 += e * e;
        ++included;
    }
    if (included == 0) {
        est.reliable = false;
        return est;
    }
    est.energy = sum / included;
    if (included > 1) {
        const double var = (sum2 - sum * sum / included) / (included - 1);
        est.stderr_ = std::sqrt(std::max(0.0, var) / included);
    }
    est.reliable = est.excluded <= M / 10;
    return est;
}

namespace {

constexpr int kListStride = 8;  // lane width of the batched wave panels

// Pair-interaction value at an off-grid separation from the offset table
// (linear interpolation; the table is vd[m] = V(m*h)).
inline double vd_interp(const std::vector<double>& vd, double dist, double inv_h) {
    double t = dist * inv_h;
    const int m = static_cast<int>(t);
    if (m + 1 >= static_cast<int>(vd.size())) return vd.back();
    const double f = t - m;
    return vd[m] * (1.0 - f) + vd[m + 1] * f;
}

class EffectiveBuilder {
public:
    EffectiveBuilder(const RunConfig& cfg) : cfg_(cfg), grid_(cfg.grid) {
        if (cfg.params.n_particles > 1 && cfg.interaction_enabled) {
            vd_ = pair_offset_table(grid_, cfg.params);
            if (grid_.dimension == 2 && !cfg.exact_potential)
                conv_ = std::make_unique<PairConvolver2D>(grid_, cfg.params);
        }
    }

    // Rebuild per-step tables from the snapshot.
    void prepare(const std::vector<WalkerCloud>& snap) {
        const int N = cfg_.params.n_particles;
        if (N < 2 || !cfg_.interaction_enabled || cfg_.exact_potential) return;
        if (cfg_.mode == RunMode::local_limit) return;
        densities_.resize(N);
        for (int j = 0; j < N; ++j) densities_[j] = bin_cloud(snap[j], grid_);
        if (cfg_.mode == RunMode::hartree) {
            hartree_.resize(N);
            for (int j = 0; j < N; ++j) {
                if (grid_.dimension == 1) {
                    hartree_[j] = hartree_field_1d(densities_[j], grid_, vd_);
                } else {
                    std::vector<double> w(grid_.size());
                    const double inv_m = 1.0 / cfg_.walkers;
                    for (std::size_t p = 0; p < w.size(); ++p) w[p] = densities_[j][p] * inv_m;
                    hartree_[j].resize(grid_.size());
                    conv_->convolve(w.data(), hartree_[j].data());
                }
            }
            return;
        }
        if (grid_.dimension == 1) {
            tables_.clear();
            tables_.reserve(N);
            for (int j = 0; j < N; ++j)
                tables_.emplace_back(densities_[j], grid_, vd_, snap[j].nonlocal_length);
        }
    }

    // standard interacting 1D runs can fill potential lanes directly
    bool lane_fast_path() const {
        return cfg_.mode == RunMode::standard && !cfg_.exact_potential && grid_.dimension == 1;
    }

    // V_eff for wave (i, k) added into a lane-strided potential panel.
    void gather_lane(int i, int k, const std::vector<WalkerCloud>& snap, double* out_lane) const {
        const int N = cfg_.params.n_particles;
        if (N < 2 || !cfg_.interaction_enabled) return;
        for (int j = 0; j < N; ++j) {
            if (j == i) continue;
            tables_[j].gather_strided(snap[j].positions[k], out_lane, kListStride);
        }
    }

    // V_eff for guide wave (i, k) from the snapshot, accumulated into out.
    void gather(int i, int k, const std::vector<WalkerCloud>& snap,
                std::vector<double>& out) const {
        const int N = cfg_.params.n_particles;
        std::fill(out.begin(), out.end(), 0.0);
        if (N < 2 || !cfg_.interaction_enabled) return;
        const int d = grid_.dimension;

        if (cfg_.exact_potential) {
            const ScalarField f =
                effective_potential_field(i, k, snap, cfg_.params, grid_, cfg_.mode);
            std::copy(f.values.begin(), f.values.end(), out.begin());
            return;
        }

        const int n = grid_.points_per_axis;
        const double inv_h = 1.0 / grid_.spacing();
        switch (cfg_.mode) {
            case RunMode::local_limit: {
                for (int j = 0; j < N; ++j) {
                    if (j == i) continue;
                    const auto rk = snap[j].walker(k);
                    if (d == 1) {
                        for (int ix = 0; ix < n; ++ix)
                            out[ix] += vd_interp(vd_, std::abs(grid_.coord(ix) - rk[0]), inv_h);
                    } else {
                        for (int iy = 0; iy < n; ++iy)
                            for (int ix = 0; ix < n; ++ix) {
                                const double dx = grid_.coord(ix) - rk[0];
                                const double dy = grid_.coord(iy) - rk[1];
                                out[static_cast<std::size_t>(iy) * n + ix] +=
                                    vd_interp(vd_, std::sqrt(dx * dx + dy * dy), inv_h);
                            }
                    }
                }
                return;
            }
            case RunMode::hartree: {
                for (int j = 0; j < N; ++j) {
                    if (j == i) continue;
                    const std::vector<double>& f = hartree_[j];
                    for (std::size_t p = 0; p < out.size(); ++p) out[p] += f[p];
                }
                return;
            }
            case RunMode::standard: {
                if (d == 1) {
                    for (int j = 0; j < N; ++j) {
                        if (j == i) continue;
                        tables_[j].gather(snap[j].positions[static_cast<std::size_t>(k) * d],
                                          out.data());
                    }
                } else {
                    thread_local std::vector<double> wc;
                    wc.assign(grid_.size(), 0.0);
                    bool any = false;
                    for (int j = 0; j < N; ++j) {
                        if (j == i) continue;
                        any |= accumulate_weighted_density_2d(densities_[j], grid_,
                                                              snap[j].walker(k).data(),
                                                              snap[j].nonlocal_length, wc);
                    }
                    if (any) conv_->convolve(wc.data(), out.data());
                }
                return;
            }
        }
    }

private:
    const RunConfig& cfg_;
    Grid grid_;
    std::vector<double> vd_;
    std::unique_ptr<PairConvolver2D> conv_;
    std::vector<std::vector<double>> densities_;
    std::vector<std::vector<double>> hartree_;
    std::vector<ColumnTable1D> tables_;
};

ScalarField initial_wave(const Grid& grid) {
    ScalarField f = ScalarField::zeros(grid);
    const int n = grid.points_per_axis;
    if (grid.dimension == 1) {
        for (int i = 0; i < n; ++i) {
            const double x = grid.coord(i);
            f.values[i] = std::exp(-0.5 * x * x);
        }
    } else {
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const double x = grid.coord(ix);
                const double y = grid.coord(iy);
                f.values[static_cast<std::size_t>(iy) * n + ix] = std::exp(-0.5 * (x * x + y * y));
            }
    }
    normalize(f);
    return f;
}

constexpr std::uint64_t kInitDrawTag = ~0ULL;
constexpr int kLanes = 8;

// 1D guide waves in lane-blocked layout: blocks of 8 walkers stored as
// (n x 8) panels so the per-walker tridiagonal solves vectorize across lanes.
struct LaneWaves {
    int n = 0;
    int count = 0;
    int blocks = 0;
    std::vector<double> buf;  // blocks * n * kLanes

    void init(int count_, const std::vector<double>& phi0) {
        n = static_cast<int>(phi0.size());
        count = count_;
        blocks = (count + kLanes - 1) / kLanes;
        buf.resize(static_cast<std::size_t>(blocks) * n * kLanes);
        for (int b = 0; b < blocks; ++b) {
            double* panel = block(b);
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < kLanes; ++l) panel[i * kLanes + l] = phi0[i];
        }
    }
    double* block(int b) { return buf.data() + static_cast<std::size_t>(b) * n * kLanes; }
    const double* block(int b) const {
        return buf.data() + static_cast<std::size_t>(b) * n * kLanes;
    }
    double value(int k, int i) const {
        return buf[static_cast<std::size_t>(k / kLanes) * n * kLanes +
                   static_cast<std::size_t>(i) * kLanes + (k % kLanes)];
    }
    void extract(int k, std::vector<double>& out) const {
        out.resize(n);
        const double* panel = block(k / kLanes);
        const int l = k % kLanes;
        for (int i = 0; i < n; ++i) out[i] = panel[i * kLanes + l];
    }
    void insert(int k, const std::vector<double>& in) {
        double* panel = block(k / kLanes);
        const int l = k % kLanes;
        for (int i = 0; i < n; ++i) panel[i * kLanes + l] = in[i];
    }
};

// Backward-Euler step + renormalization for one 8-lane panel. pot holds the
// full potential in the same lane layout. Returns false if any active lane
// lost its norm.
bool lane_be_step(double* panel, const double* pot, int n, int active, double dtau, double kin,
                  double h, double* cp, double* dp) {
    const double off = -dtau * kin;
    for (int l = 0; l < kLanes; ++l) {
        const double diag = 1.0 + dtau * (2.0 * kin + pot[l]);
        cp[l] = off / diag;
        dp[l] = panel[l] / diag;
    }
    for (int i = 1; i < n; ++i) {
        double* cpi = cp + static_cast<std::size_t>(i) * kLanes;
        double* dpi = dp + static_cast<std::size_t>(i) * kLanes;
        const double* cpm = cpi - kLanes;
        const double* dpm = dpi - kLanes;
        const double* poti = pot + static_cast<std::size_t>(i) * kLanes;
        const double* wavi = panel + static_cast<std::size_t>(i) * kLanes;
        for (int l = 0; l < kLanes; ++l) {
            const double m = 1.0 + dtau * (2.0 * kin + poti[l]) - off * cpm[l];
            cpi[l] = off / m;
            dpi[l] = (wavi[l] - off * dpm[l]) / m;
        }
    }
    double norm2[kLanes];
    {
        double* last = panel + static_cast<std::size_t>(n - 1) * kLanes;
        const double* dpl = dp + static_cast<std::size_t>(n - 1) * kLanes;
        for (int l = 0; l < kLanes; ++l) {
            last[l] = dpl[l];
            norm2[l] = last[l] * last[l];
        }
    }
    for (int i = n - 2; i >= 0; --i) {
        double* wavi = panel + static_cast<std::size_t>(i) * kLanes;
        const double* wavn = wavi + kLanes;
        const double* cpi = cp + static_cast<std::size_t>(i) * kLanes;
        const double* dpi = dp + static_cast<std::size_t>(i) * kLanes;
        for (int l = 0; l < kLanes; ++l) {
            wavi[l] = dpi[l] - cpi[l] * wavn[l];
            norm2[l] += wavi[l] * wavi[l];
        }
    }
    double inv[kLanes];
    for (int l = 0; l < kLanes; ++l) {
        const double n2 = norm2[l] * h;
        if (l < active && (!(n2 > 1e-300) || !std::isfinite(n2))) return false;
        inv[l] = (n2 > 1e-300) ? 1.0 / std::sqrt(n2) : 1.0;
    }
    for (int i = 0; i < n; ++i) {
        double* wavi = panel + static_cast<std::size_t>(i) * kLanes;
        for (int l = 0; l < kLanes; ++l) wavi[l] *= inv[l];
    }
    return true;
}

// Probes on lane-stored 1D waves; same interpolation as module grid.
struct LaneProbe {
    double phi = 0.0;
    double logdrift = 0.0;
    double kinetic = 0.0;
    bool node = false;
};

LaneProbe lane_probe(const double* panel, int lane, int n, double L, double h, double x,
                     bool want_kin) {
    LaneProbe out;
    double t = (x + L) / h;
    t = std::clamp(t, 0.0, static_cast<double>(n - 1));
    const int i0 = std::min(static_cast<int>(t), n - 2);
    const double fr = t - i0;
    auto at = [&](int i) -> double {
        if (i < 0 || i >= n) return 0.0;
        return panel[static_cast<std::size_t>(i) * kLanes + lane];
    };
    out.phi = at(i0) * (1.0 - fr) + at(i0 + 1) * fr;
    if (std::abs(out.phi) < 1e-12) {
        out.node = true;
        return out;
    }
    const double inv_2h = 0.5 / h;
    const double g0 = (at(i0 + 1) - at(i0 - 1)) * inv_2h;
    const double g1 = (at(i0 + 2) - at(i0)) * inv_2h;
    out.logdrift = (g0 * (1.0 - fr) + g1 * fr) / out.phi;
    if (want_kin) {
        const double inv_h2 = 1.0 / (h * h);
        const double l0 = (at(i0 - 1) - 2.0 * at(i0) + at(i0 + 1)) * inv_h2;
        const double l1 = (at(i0) - 2.0 * at(i0 + 1) + at(i0 + 2)) * inv_h2;
        out.kinetic = -0.5 * (l0 * (1.0 - fr) + l1 * fr) / out.phi;
    }
    return out;
}

} // namespace

RunResult relax_ground_state(const RunConfig& config) {
    config.validate();
    const auto t_start = std::chrono::steady_clock::now();
    if (config.threads > 0) omp_set_num_threads(config.threads);

    const int N = config.params.n_particles;
    const int M = config.walkers;
    const int d = config.grid.dimension;
    const Grid& grid = config.grid;
    const double L = grid.half_extent;
    const bool shared_wave = (config.mode == RunMode::hartree);
    const int waves_per_particle = shared_wave ? 1 : M;

    RunResult result;
    result.seed = config.seed;
    const NormalSource rng{config.seed};

    // trap potential on the grid
    ScalarField ven = ScalarField::zeros(grid);
    {
        const int n = grid.points_per_axis;
        double node[2];
        for (std::size_t p = 0; p < grid.size(); ++p) {
            node[0] = grid.coord(static_cast<int>(p) % n);
            node[1] = grid.coord(static_cast<int>(p / n));
            ven.values[p] = core_potential({node, static_cast<std::size_t>(d)});
        }
    }

    // guide waves: harmonic one-body ground state; walkers from its density
    const ScalarField phi0 = initial_wave(grid);
    const bool lane_mode = (d == 1);
    std::vector<LaneWaves> lanes(lane_mode ? N : 0);
    result.guides.resize(N);
    result.clouds.resize(N);
    for (int i = 0; i < N; ++i) {
        result.guides[i].particle_index = i;
        if (lane_mode)
            lanes[i].init(waves_per_particle, phi0.values);
        else
            result.guides[i].waves.assign(waves_per_particle, phi0);
        WalkerCloud& cloud = result.clouds[i];
        cloud.particle_index = i;
        cloud.dimension = d;
        cloud.positions.resize(static_cast<std::size_t>(M) * d);
        for (int k = 0; k < M; ++k) {
            double z0, z1;
            rng.walker_pair(kInitDrawTag, static_cast<std::uint64_t>(i),
                            static_cast<std::uint64_t>(k), z0, z1);
            const double w = std::sqrt(0.5);  // |phi0|^2 has stddev 1/sqrt(2) per axis
            double* r = cloud.positions.data() + static_cast<std::size_t>(k) * d;
            r[0] = std::clamp(z0 * w, -L, L);
            if (d == 2) r[1] = std::clamp(z1 * w, -L, L);
        }
    }

    EffectiveBuilder builder(config);
    std::vector<WalkerCloud> snap;
    result.trace.resize(config.steps);

    const int n = grid.points_per_axis;
    const double h = grid.spacing();
    const double kin = 0.5 / (h * h);
    std::vector<double> local_e(M);
    std::vector<unsigned char> local_excl(M);
    std::vector<int> clamp_per_walker(static_cast<std::size_t>(N) * M);
    const int wave_tasks = N * waves_per_particle;
    const int lane_blocks = (waves_per_particle + kLanes - 1) / kLanes;
    std::vector<unsigned char> wave_failed(
        static_cast<std::size_t>(std::max(wave_tasks, N * std::max(lane_blocks, 1))), 0);

    for (int step = 0; step < config.steps; ++step) {
        const double tau = step * config.dtau;
        const double amplitude = noise_amplitude(config.schedule, tau);

        // (1) snapshot clouds; (2) recompute s and sigma = alpha * s
        for (int i = 0; i < N; ++i) {
            WalkerCloud& cloud = result.clouds[i];
            cloud.sample_stddev = sample_stddev(cloud);
            cloud.nonlocal_length = config.alpha * cloud.sample_stddev;
        }
        snap = result.clouds;
        builder.prepare(snap);

        // (3) advance each guide wave in its per-walker effective potential
        std::fill(wave_failed.begin(), wave_failed.end(), 0);
        if (lane_mode) {
#pragma omp parallel for schedule(dynamic, 2) collapse(2)
            for (int i = 0; i < N; ++i) {
                for (int b = 0; b < lane_blocks; ++b) {
                    thread_local std::vector<double> scratch, pot, cp, dp;
                    scratch.resize(n);
                    pot.resize(static_cast<std::size_t>(n) * kLanes);
                    cp.resize(static_cast<std::size_t>(n) * kLanes);
                    dp.resize(static_cast<std::size_t>(n) * kLanes);
                    const int k_lo = b * kLanes;
                    const int active = std::min(kLanes, waves_per_particle - k_lo);
                    if (builder.lane_fast_path()) {
                        for (int p = 0; p < n; ++p) {
                            const double v = ven.values[p];
                            double* row = pot.data() + static_cast<std::size_t>(p) * kLanes;
                            for (int l = 0; l < kLanes; ++l) row[l] = v;
                        }
                        for (int l = 0; l < kLanes; ++l) {
                            const int k = std::min(k_lo + l, waves_per_particle - 1);
                            builder.gather_lane(i, k, snap, pot.data() + l);
                        }
                    } else {
                        for (int l = 0; l < kLanes; ++l) {
                            const int k = std::min(k_lo + l, waves_per_particle - 1);
                            builder.gather(i, k, snap, scratch);
                            for (int p = 0; p < n; ++p)
                                pot[static_cast<std::size_t>(p) * kLanes + l] =
                                    ven.values[p] + scratch[p];
                        }
                    }
                    if (!lane_be_step(lanes[i].block(b), pot.data(), n, active, config.dtau, kin,
                                      h, cp.data(), dp.data()))
                        wave_failed[static_cast<std::size_t>(i) * lane_blocks + b] = 1;
                }
            }
        } else {
#pragma omp parallel for schedule(dynamic, 8)
            for (int t = 0; t < wave_tasks; ++t) {
                const int i = t / waves_per_particle;
                const int k = t % waves_per_particle;
                thread_local std::vector<double> vtot;
                thread_local ScalarField pot;
                vtot.resize(grid.size());
                builder.gather(i, k, snap, vtot);
                if (pot.values.size() != grid.size()) pot = ScalarField::zeros(grid);
                pot.grid = grid;
                for (std::size_t p = 0; p < vtot.size(); ++p)
                    pot.values[p] = ven.values[p] + vtot[p];
                try {
                    imaginary_time_step(result.guides[i].waves[k], pot, config.dtau);
                } catch (const NumericalError&) {
                    wave_failed[t] = 1;
                }
            }
        }
        for (unsigned char f : wave_failed)
            if (f) throw CollapsedWave();

        // (4) move walkers off the snapshot, drift from their own guide wave
        std::fill(clamp_per_walker.begin(), clamp_per_walker.end(), 0);
#pragma omp parallel for schedule(static) collapse(2)
        for (int i = 0; i < N; ++i) {
            for (int k = 0; k < M; ++k) {
                const int wk = shared_wave ? 0 : k;
                const auto rs = snap[i].walker(k);
                double drift[2] = {0.0, 0.0};
                if (config.drift_enabled) {
                    if (lane_mode) {
                        const LaneProbe lp = lane_probe(lanes[i].block(wk / kLanes), wk % kLanes,
                                                        n, L, h, rs[0], false);
                        drift[0] = lp.node ? 0.0 : lp.logdrift;
                    } else {
                        const ProbeResult pr =
                            probe_log_gradient(result.guides[i].waves[wk], rs);
                        drift[0] = pr.grad[0];
                        drift[1] = pr.grad[1];
                    }
                }
                double eta[2];
                rng.walker_pair(static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(i),
                                static_cast<std::uint64_t>(k), eta[0], eta[1]);
                double* r = result.clouds[i].walker_mut(k).data();
                for (int c = 0; c < d; ++c) r[c] = rs[c];
                diffuse_step({r, static_cast<std::size_t>(d)},
                             {drift, static_cast<std::size_t>(d)}, config.dtau, amplitude,
                             {eta, static_cast<std::size_t>(d)});
                for (int c = 0; c < d; ++c) {
                    if (r[c] < -L || r[c] > L) {
                        r[c] = std::clamp(r[c], -L, L);
                        clamp_per_walker[static_cast<std::size_t>(i) * M + k] += 1;
                    }
                }
            }
        }

        // (5) record the energy estimator at the new configuration
        if (lane_mode) {
#pragma omp parallel for schedule(static)
            for (int k = 0; k < M; ++k) {
                const int wk = shared_wave ? 0 : k;
                double e = 0.0;
                bool excl = false;
                for (int i = 0; i < N; ++i) {
                    const double x = result.clouds[i].positions[k];
                    const LaneProbe lp =
                        lane_probe(lanes[i].block(wk / kLanes), wk % kLanes, n, L, h, x, true);
                    if (lp.node) {
                        excl = true;
                        break;
                    }
                    e += lp.kinetic + 0.5 * x * x;
                }
                if (!excl && config.interaction_enabled) {
                    for (int i = 0; i < N; ++i)
                        for (int j = 0; j < i; ++j)
                            e += pair_potential_r(result.clouds[i].positions[k] -
                                                      result.clouds[j].positions[k],
                                                  config.params);
                }
                local_e[k] = excl ? 0.0 : e;
                local_excl[k] = excl ? 1 : 0;
            }
        } else {
#pragma omp parallel for schedule(static)
            for (int k = 0; k < M; ++k) {
                double e = 0.0;
                bool excl = false;
                for (int i = 0; i < N; ++i) {
                    const int wk = shared_wave ? 0 : k;
                    const auto r = result.clouds[i].walker(k);
                    bool node = false;
                    e += probe_kinetic(result.guides[i].waves[wk], r, &node);
                    if (node) {
                        excl = true;
                        break;
                    }
                    e += core_potential(r);
                }
                if (!excl && config.interaction_enabled) {
                    for (int i = 0; i < N; ++i)
                        for (int j = 0; j < i; ++j)
                            e += pair_potential(result.clouds[i].walker(k),
                                                result.clouds[j].walker(k), config.params);
                }
                local_e[k] = excl ? 0.0 : e;
                local_excl[k] = excl ? 1 : 0;
            }
        }
        double sum = 0.0, sum2 = 0.0;
        int included = 0, excluded = 0;
        for (int k = 0; k < M; ++k) {  // ordered reduction, reproducible
            if (local_excl[k]) {
                ++excluded;
                continue;
            }
            sum += local_e[k];
            sum2 += local_e[k] * local_e[k];
            ++included;
        }
        StepStats& st = result.trace[step];
        st.tau = tau + config.dtau;
        st.energy = included ? sum / included : 0.0;
        if (included > 1) {
            const double var = (sum2 - sum * sum / included) / (included - 1);
            st.energy_err = std::sqrt(std::max(0.0, var) / included);
        }
        if (!std::isfinite(st.energy))
            throw NumericalError("non-finite energy at step " + std::to_string(step));
        double s_acc = 0.0, sig_acc = 0.0;
        for (int i = 0; i < N; ++i) {
            s_acc += result.clouds[i].sample_stddev;
            sig_acc += result.clouds[i].nonlocal_length;
        }
        st.s_mean = s_acc / N;
        st.sigma_mean = sig_acc / N;
        int clamped = 0;
        for (int v : clamp_per_walker) clamped += v;
        st.clamped = clamped;
        st.node_excluded = excluded;
        result.clamp_count += clamped;
        result.node_count += excluded;
    }

    // materialize lane-stored waves into the per-walker guide sets
    if (lane_mode) {
        for (int i = 0; i < N; ++i) {
            result.guides[i].waves.resize(waves_per_particle);
            std::vector<double> row;
            for (int k = 0; k < waves_per_particle; ++k) {
                lanes[i].extract(k, row);
                result.guides[i].waves[k].grid = grid;
                result.guides[i].waves[k].values = row;
            }
        }
        lanes.clear();
    }

    // windowed energy
    const int W = config.window_steps();
    double sum = 0.0, sum2 = 0.0;
    for (int t = config.steps - W; t < config.steps; ++t) {
        sum += result.trace[t].energy;
        sum2 += result.trace[t].energy * result.trace[t].energy;
    }
    result.energy = sum / W;
    const double var = (sum2 - sum * sum / W) / std::max(1, W - 1);
    result.energy_err = std::sqrt(std::max(0.0, var) / W);

    result.s.resize(N);
    result.sigma.resize(N);
    for (int i = 0; i < N; ++i) {
        result.s[i] = result.clouds[i].sample_stddev;
        result.sigma[i] = result.clouds[i].nonlocal_length;
    }
    result.linear_entropy = 1.0 - purity_streaming(result.guides[0]);

    const long move_total = static_cast<long>(N) * M * config.steps;
    result.clamp_fraction = static_cast<double>(result.clamp_count) / (move_total * d);
    if (result.clamp_fraction > 1e-3) {
        result.validation_ok = false;
        result.validation_message = "clamped move fraction above 0.1% (domain too small)";
    }
    const double node_fraction =
        static_cast<double>(result.node_count) / (static_cast<double>(M) * config.steps);
    if (node_fraction > 0.1) {
        result.validation_ok = false;
        result.validation_message += std::string(result.validation_message.empty() ? "" : "; ") +
                                     "energy estimator unreliable (>10% node-excluded walkers)";
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

ScanResult alpha_scan(const RunConfig& base, const std::vector<double>& alphas,
                      bool common_seed) {
    if (alphas.empty()) throw ConfigError("alpha scan needs at least one alpha");
    for (double a : alphas)
        if (!(a > 0.0)) throw ConfigError("alpha values must be > 0");

    ScanResult scan;
    scan.rows.reserve(alphas.size());
    double best = 0.0;
    for (std::size_t q = 0; q < alphas.size(); ++q) {
        RunConfig cfg = base;
        cfg.alpha = alphas[q];
        if (!common_seed) cfg.seed = base.seed + q;
        const RunResult r = relax_ground_state(cfg);
        ScanRow row;
        row.alpha = alphas[q];
        row.energy = r.energy;
        row.energy_err = r.energy_err;
        row.entropy = r.linear_entropy;
        row.s = r.s[0];
        row.sigma = r.sigma[0];
        scan.rows.push_back(row);
        if (q == 0 || r.energy < best) {
            best = r.energy;
            scan.opt_index = static_cast<int>(q);
        }
    }
    scan.alpha_opt = scan.rows[scan.opt_index].alpha;
    scan.alpha_meaningful = base.params.n_particles >= 2 && base.interaction_enabled;
    if (!scan.alpha_meaningful) scan.note = "N=1: energy is alpha-independent, alpha_opt not meaningful";

    // local minima beyond noise -> non-convex scan, reported not resolved
    int minima = 0;
    for (std::size_t q = 0; q < scan.rows.size(); ++q) {
        const double tol = 2.0 * scan.rows[q].energy_err;
        const bool left_up = (q == 0) || scan.rows[q - 1].energy > scan.rows[q].energy + tol;
        const bool right_up =
            (q + 1 == scan.rows.size()) || scan.rows[q + 1].energy > scan.rows[q].energy + tol;
        if (left_up && right_up) ++minima;
    }
    if (minima > 1) {
        scan.nonconvex = true;
        scan.note += std::string(scan.note.empty() ? "" : "; ") +
                     "non-convex scan: " + std::to_string(minima) + " local minima beyond noise";
    }
    return scan;
}

RunResult hartree_limit_run(RunConfig config) {
    config.mode = RunMode::hartree;
    return relax_ground_state(config);
}

RunResult local_limit_run(RunConfig config) {
    config.mode = RunMode::local_limit;
    return relax_ground_state(config);
}

} // namespace tdqmc
