#include "tdqmc/oracle.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace tdqmc {

namespace {

constexpr std::size_t kMaxConfigPoints = 20'000'000;  // ~160 MB per array

std::size_t ipow(std::size_t b, std::size_t e) {
    std::size_t r = 1;
    while (e--) r *= b;
    return r;
}

// deterministic blocked reduction
template <typename F>
double block_sum(std::size_t total, F&& per_index) {
    const std::size_t nblocks = 1024;
    const std::size_t block = (total + nblocks - 1) / nblocks;
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t b = 0; b < nblocks; ++b) {
        const std::size_t lo = b * block;
        const std::size_t hi = std::min(total, lo + block);
        double acc = 0.0;
        for (std::size_t idx = lo; idx < hi; ++idx) acc += per_index(idx);
        partial[b] = acc;
    }
    double out = 0.0;
    for (double p : partial) out += p;
    return out;
}

std::vector<double> build_potential(const PhysicalParams& params, const Grid& grid,
                                    std::size_t total, std::size_t axes) {
    const int n = grid.points_per_axis;
    const int d = grid.dimension;
    const int N = params.n_particles;
    const double h = grid.spacing();
    std::vector<double> vpair_tab;  // 1D: exact on index offsets
    if (d == 1) {
        vpair_tab.resize(n);
        for (int m = 0; m < n; ++m) vpair_tab[m] = pair_potential_r(m * h, params);
    }
    std::vector<double> V(total);
#pragma omp parallel for schedule(static)
    for (std::size_t idx = 0; idx < total; ++idx) {
        int ax_idx[8];
        std::size_t rem = idx;
        for (std::size_t ax = 0; ax < axes; ++ax) {
            ax_idx[ax] = static_cast<int>(rem % n);
            rem /= n;
        }
        double v = 0.0;
        for (int i = 0; i < N; ++i) {
            for (int c = 0; c < d; ++c) {
                const double x = grid.coord(ax_idx[i * d + c]);
                v += 0.5 * x * x;
            }
        }
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < i; ++j) {
                if (d == 1) {
                    v += vpair_tab[std::abs(ax_idx[i] - ax_idx[j])];
                } else {
                    const double dx = (ax_idx[i * 2] - ax_idx[j * 2]) * h;
                    const double dy = (ax_idx[i * 2 + 1] - ax_idx[j * 2 + 1]) * h;
                    v += pair_potential_r(std::sqrt(dx * dx + dy * dy), params);
                }
            }
        V[idx] = v;
    }
    return V;
}

// (I + dtau*K_axis)^-1 along one axis, all 1D systems in parallel.
void sweep_axis(std::vector<double>& psi, int n, std::size_t stride, double dtau, double kin) {
    const std::size_t total = psi.size();
    const std::size_t nsys = total / n;
    const double off = -dtau * kin;
    const double diag = 1.0 + dtau * 2.0 * kin;
#pragma omp parallel for schedule(static)
    for (std::size_t s = 0; s < nsys; ++s) {
        const std::size_t base = (s / stride) * (stride * n) + (s % stride);
        thread_local std::vector<double> cp, dp;
        cp.resize(n);
        dp.resize(n);
        cp[0] = off / diag;
        dp[0] = psi[base] / diag;
        for (int i = 1; i < n; ++i) {
            const double m = diag - off * cp[i - 1];
            cp[i] = off / m;
            dp[i] = (psi[base + i * stride] - off * dp[i - 1]) / m;
        }
        psi[base + static_cast<std::size_t>(n - 1) * stride] = dp[n - 1];
        for (int i = n - 2; i >= 0; --i)
            psi[base + static_cast<std::size_t>(i) * stride] =
                dp[i] - cp[i] * psi[base + static_cast<std::size_t>(i + 1) * stride];
    }
}

void normalize_config(std::vector<double>& psi, double norm_weight) {
    const double n2 = block_sum(psi.size(), [&](std::size_t i) { return psi[i] * psi[i]; }) *
                      norm_weight;
    if (!(n2 > 1e-300)) throw NumericalError("configuration wave collapsed");
    const double inv = 1.0 / std::sqrt(n2);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= inv;
}

double rayleigh_config(const std::vector<double>& psi, const std::vector<double>& V, int n,
                       std::size_t axes, double kin) {
    const std::size_t total = psi.size();
    std::vector<std::size_t> strides(axes);
    std::size_t st = 1;
    for (std::size_t ax = 0; ax < axes; ++ax) {
        strides[ax] = st;
        st *= n;
    }
    const double num = block_sum(total, [&](std::size_t idx) {
        const double p = psi[idx];
        double hp = (2.0 * kin * axes + V[idx]) * p;
        for (std::size_t ax = 0; ax < axes; ++ax) {
            const std::size_t s = strides[ax];
            const int i = static_cast<int>((idx / s) % n);
            if (i > 0) hp -= kin * psi[idx - s];
            if (i < n - 1) hp -= kin * psi[idx + s];
        }
        return p * hp;
    });
    const double den = block_sum(total, [&](std::size_t i) { return psi[i] * psi[i]; });
    return num / den;
}

} // namespace

double ConfigWave::norm_weight() const {
    double w = 1.0;
    for (std::size_t ax = 0; ax < axes(); ++ax) w *= grid.spacing();
    return w;
}

ConfigWave exact_ground_state(const PhysicalParams& params, const Grid& grid, double tol,
                              int max_iters) {
    params.validate();
    grid.validate();
    if (grid.dimension != params.dimension) throw ConfigError("grid/params dimension mismatch");
    const std::size_t axes = static_cast<std::size_t>(params.n_particles) * grid.dimension;
    if (axes > 4) throw ConfigError("configuration space beyond 4 axes is out of budget");
    const int n = grid.points_per_axis;
    const std::size_t total = ipow(static_cast<std::size_t>(n), axes);
    if (total > kMaxConfigPoints) throw ConfigError("configuration grid exceeds memory budget");

    ConfigWave psi;
    psi.grid = grid;
    psi.n_particles = params.n_particles;
    psi.values.resize(total);

    // symmetric product-Gaussian start (exchange symmetry is preserved by H)
    {
        std::vector<double> g1(n);
        for (int i = 0; i < n; ++i) {
            const double x = grid.coord(i);
            g1[i] = std::exp(-0.5 * x * x);
        }
#pragma omp parallel for schedule(static)
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rem = idx;
            double v = 1.0;
            for (std::size_t ax = 0; ax < axes; ++ax) {
                v *= g1[rem % n];
                rem /= n;
            }
            psi.values[idx] = v;
        }
    }
    normalize_config(psi.values, psi.norm_weight());

    const std::vector<double> V = build_potential(params, grid, total, axes);
    const double kin = 0.5 / (grid.spacing() * grid.spacing());

    struct Phase {
        double dtau;
        int iters;
        bool to_convergence;
    };
    std::vector<Phase> phases = {{0.1, 400, false}, {0.02, 400, false}, {0.004, max_iters, true}};
    if (total <= 20'000) {
        // small systems: drive the dimension-splitting bias below 1e-7 so the
        // energy agrees with an independent eigensolve at the 1e-6 level
        phases.push_back({0.001, 4000, false});
        phases.push_back({0.0002, 8000, false});
    }

    int iters_used = 0;
    for (const Phase& ph : phases) {
        double e_prev = 1e300;
        const double dtau = ph.dtau;
        for (int it = 0; it < ph.iters && iters_used < max_iters; ++it, ++iters_used) {
#pragma omp parallel for schedule(static)
            for (std::size_t i = 0; i < total; ++i) psi.values[i] /= (1.0 + dtau * V[i]);
            std::size_t stride = 1;
            for (std::size_t ax = 0; ax < axes; ++ax) {
                sweep_axis(psi.values, n, stride, dtau, kin);
                stride *= n;
            }
            normalize_config(psi.values, psi.norm_weight());
            if (ph.to_convergence && (it % 25 == 24)) {
                const double e = rayleigh_config(psi.values, V, n, axes, kin);
                if (std::abs(e - e_prev) < tol * 25) break;
                e_prev = e;
            }
        }
    }

    const double asym = exchange_asymmetry(psi);
    if (asym > 1e-8) throw NumericalError("oracle lost exchange symmetry: " + std::to_string(asym));
    return psi;
}

double exact_energy(const ConfigWave& psi, const PhysicalParams& params) {
    const std::size_t axes = psi.axes();
    const int n = psi.grid.points_per_axis;
    const std::size_t total = psi.values.size();
    const std::vector<double> V = build_potential(params, psi.grid, total, axes);
    const double kin = 0.5 / (psi.grid.spacing() * psi.grid.spacing());
    return rayleigh_config(psi.values, V, n, axes, kin);
}

double exchange_asymmetry(const ConfigWave& psi) {
    const int n = psi.grid.points_per_axis;
    const int d = psi.grid.dimension;
    const int N = psi.n_particles;
    const std::size_t total = psi.values.size();
    double worst = 0.0;
    for (int p = 0; p + 1 < N; ++p) {
        // swap the coordinate blocks of particles p and p+1
        const std::size_t sp = ipow(static_cast<std::size_t>(n), static_cast<std::size_t>(p) * d);
        const std::size_t sq = sp * ipow(static_cast<std::size_t>(n), d);
        const std::size_t blk = ipow(static_cast<std::size_t>(n), d);
        std::vector<double> partial(1024, 0.0);
        const std::size_t nblocks = 1024;
        const std::size_t chunk = (total + nblocks - 1) / nblocks;
#pragma omp parallel for schedule(static)
        for (std::size_t b = 0; b < nblocks; ++b) {
            double mx = 0.0;
            const std::size_t lo = b * chunk, hi = std::min(total, lo + chunk);
            for (std::size_t idx = lo; idx < hi; ++idx) {
                const std::ptrdiff_t ip = static_cast<std::ptrdiff_t>((idx / sp) % blk);
                const std::ptrdiff_t iq = static_cast<std::ptrdiff_t>((idx / sq) % blk);
                const std::ptrdiff_t shift = (iq - ip) * static_cast<std::ptrdiff_t>(sp) +
                                             (ip - iq) * static_cast<std::ptrdiff_t>(sq);
                const std::size_t swapped = static_cast<std::size_t>(
                    static_cast<std::ptrdiff_t>(idx) + shift);
                mx = std::max(mx, std::abs(psi.values[idx] - psi.values[swapped]));
            }
            partial[b] = mx;
        }
        for (double m : partial) worst = std::max(worst, m);
    }
    return worst;
}

DensityMatrix exact_one_body_rdm(const ConfigWave& psi) {
    const int n = psi.grid.points_per_axis;
    const int d = psi.grid.dimension;
    const std::size_t blk = ipow(static_cast<std::size_t>(n), d);  // particle-0 block (fastest)
    const std::size_t rest = psi.values.size() / blk;
    double hd = psi.grid.spacing();
    if (d == 2) hd *= psi.grid.spacing();
    double rest_weight = 1.0;
    for (std::size_t ax = 0; ax < psi.axes() - d; ++ax) rest_weight *= psi.grid.spacing();

    DensityMatrix rho;
    rho.grid = psi.grid;
    rho.trace_weight = hd;
    rho.values.assign(blk * blk, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t a = 0; a < blk; ++a) {
        double* row = rho.values.data() + a * blk;
        for (std::size_t r = 0; r < rest; ++r) {
            const double* slice = psi.values.data() + r * blk;
            const double va = slice[a] * rest_weight;
            for (std::size_t b = 0; b < blk; ++b) row[b] += va * slice[b];
        }
    }
    return rho;
}

} // namespace tdqmc
