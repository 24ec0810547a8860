#include "tdqmc/observables.hpp"

#include <omp.h>

#include <cmath>

#include "tdqmc/effective.hpp"

namespace tdqmc {

namespace {

// full rho needs dim^2 doubles; 4096^2 (~134 MB) is the accepted ceiling
constexpr std::size_t kMaxMaterializedDim = 4096;

void check_normalized(const GuideSet& guides) {
    for (const ScalarField& w : guides.waves) {
        const double n2 = squared_norm(w);
        if (std::abs(n2 - 1.0) > 1e-8)
            throw ConfigError("reduced density matrix needs unit-norm guide waves");
    }
}

} // namespace

DensityMatrix reduced_density_matrix(const GuideSet& guides) {
    if (guides.waves.empty()) throw ConfigError("empty guide set");
    check_normalized(guides);
    const Grid& g = guides.waves[0].grid;
    const std::size_t dim = g.size();
    if (dim > kMaxMaterializedDim)
        throw ConfigError("grid too large to materialize rho; use purity_streaming");
    const int M = static_cast<int>(guides.waves.size());

    DensityMatrix rho;
    rho.grid = g;
    rho.trace_weight = g.spacing();
    if (g.dimension == 2) rho.trace_weight *= g.spacing();
    rho.values.assign(dim * dim, 0.0);
    const double inv_m = 1.0 / M;
#pragma omp parallel for schedule(static)
    for (std::size_t a = 0; a < dim; ++a) {
        double* row = rho.values.data() + a * dim;
        for (int k = 0; k < M; ++k) {
            const double* v = guides.waves[k].values.data();
            const double va = v[a] * inv_m;
            for (std::size_t b = 0; b < dim; ++b) row[b] += va * v[b];
        }
    }
    return rho;
}

double linear_entropy(const DensityMatrix& rho) {
    const std::size_t dim = rho.dim();
    double acc = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
        const double* row = rho.values.data() + a * dim;
        double racc = 0.0;
        for (std::size_t b = 0; b < dim; ++b) racc += row[b] * row[b];
        acc += racc;
    }
    return 1.0 - acc * rho.trace_weight * rho.trace_weight;
}

double purity_streaming(const GuideSet& guides) {
    if (guides.waves.empty()) throw ConfigError("empty guide set");
    const Grid& g = guides.waves[0].grid;
    double hd = g.spacing();
    if (g.dimension == 2) hd *= g.spacing();
    const int M = static_cast<int>(guides.waves.size());
    const std::size_t dim = g.size();

    std::vector<double> partial(M, 0.0);
#pragma omp parallel for schedule(dynamic, 4)
    for (int k = 0; k < M; ++k) {
        const double* vk = guides.waves[k].values.data();
        double acc = 0.0;
        for (int l = 0; l < M; ++l) {
            const double* vl = guides.waves[l].values.data();
            double ov = 0.0;
            for (std::size_t p = 0; p < dim; ++p) ov += vk[p] * vl[p];
            ov *= hd;
            acc += ov * ov;
        }
        partial[k] = acc;
    }
    double total = 0.0;
    for (int k = 0; k < M; ++k) total += partial[k];  // ordered reduction
    return total / (static_cast<double>(M) * M);
}

ScalarField guide_density_profile(const GuideSet& guides) {
    if (guides.waves.empty()) throw ConfigError("empty guide set");
    const Grid& g = guides.waves[0].grid;
    ScalarField dens = ScalarField::zeros(g);
    const double inv_m = 1.0 / guides.waves.size();
    for (const ScalarField& w : guides.waves)
        for (std::size_t p = 0; p < dens.values.size(); ++p)
            dens.values[p] += w.values[p] * w.values[p] * inv_m;
    return dens;
}

ScalarField walker_density_profile(const WalkerCloud& cloud, const Grid& grid) {
    if (cloud.walker_count() == 0) throw ConfigError("empty walker cloud");
    ScalarField dens = ScalarField::zeros(grid);
    dens.values = bin_cloud(cloud, grid);
    double hd = grid.spacing();
    if (grid.dimension == 2) hd *= grid.spacing();
    const double scale = 1.0 / (cloud.walker_count() * hd);
    for (double& v : dens.values) v *= scale;
    return dens;
}

} // namespace tdqmc
