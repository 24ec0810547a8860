#include <doctest.h>

#include <cmath>
#include <random>

#include "tdqmc/observables.hpp"
#include "tdqmc/rng.hpp"

using namespace tdqmc;

namespace {

ScalarField mode(const Grid& g, int which) {
    // orthonormal particle-in-a-box modes
    ScalarField f = ScalarField::zeros(g);
    const double L = g.half_extent;
    for (int i = 0; i < g.points_per_axis; ++i) {
        const double x = g.coord(i);
        f.values[i] = std::sin((which + 1) * M_PI * (x + L) / (2 * L));
    }
    normalize(f);
    return f;
}

} // namespace

TEST_CASE("pure state: identical waves give rho = phi x phi with zero entropy") {
    Grid g{6.0, 64, 1};
    GuideSet guides;
    guides.waves.assign(5, mode(g, 0));
    const DensityMatrix rho = reduced_density_matrix(guides);
    CHECK(linear_entropy(rho) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(1.0 - purity_streaming(guides) == doctest::Approx(0.0).epsilon(1e-8));
    // rho values equal the outer product
    const ScalarField& phi = guides.waves[0];
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b)
            CHECK(rho.values[static_cast<std::size_t>(a * 8) * g.size() + b * 8] ==
                  doctest::Approx(phi.values[a * 8] * phi.values[b * 8]).epsilon(1e-10));
}

TEST_CASE("equal mixtures of orthogonal states: S_L = 1 - 1/m") {
    Grid g{6.0, 64, 1};
    for (int m : {2, 3, 5}) {
        GuideSet guides;
        for (int q = 0; q < m; ++q) guides.waves.push_back(mode(g, q));
        const DensityMatrix rho = reduced_density_matrix(guides);
        CHECK(linear_entropy(rho) == doctest::Approx(1.0 - 1.0 / m).epsilon(1e-7));
    }
}

TEST_CASE("density matrix invariants: trace, symmetry, positivity") {
    Grid g{5.0, 32, 1};
    std::mt19937 gen(31);
    std::normal_distribution<double> dist;
    GuideSet guides;
    for (int k = 0; k < 12; ++k) {
        ScalarField f = ScalarField::zeros(g);
        for (double& v : f.values) v = dist(gen) + 1.5;
        normalize(f);
        guides.waves.push_back(f);
    }
    const DensityMatrix rho = reduced_density_matrix(guides);
    const std::size_t dim = rho.dim();
    double trace = 0.0;
    for (std::size_t a = 0; a < dim; ++a) trace += rho.values[a * dim + a];
    CHECK(trace * rho.trace_weight == doctest::Approx(1.0).epsilon(1e-8));
    for (std::size_t a = 0; a < dim; a += 3)
        for (std::size_t b = 0; b < dim; b += 3)
            CHECK(rho.values[a * dim + b] ==
                  doctest::Approx(rho.values[b * dim + a]).epsilon(1e-10));
    // smallest eigenvalue via shifted power iteration on (cI - rho)
    std::vector<double> x(dim, 1.0), y(dim);
    const double c = 2.0 / rho.trace_weight;
    for (int it = 0; it < 400; ++it) {
        for (std::size_t a = 0; a < dim; ++a) {
            double acc = c * x[a];
            const double* row = rho.values.data() + a * dim;
            for (std::size_t b = 0; b < dim; ++b) acc -= row[b] * x[b];
            y[a] = acc;
        }
        double nrm = 0.0;
        for (double v : y) nrm += v * v;
        nrm = std::sqrt(nrm);
        for (std::size_t a = 0; a < dim; ++a) x[a] = y[a] / nrm;
    }
    double lam = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
        double acc = 0.0;
        const double* row = rho.values.data() + a * dim;
        for (std::size_t b = 0; b < dim; ++b) acc += row[b] * x[b];
        lam += x[a] * acc;
    }
    CHECK(lam >= -1e-8);  // most-negative eigenvalue of rho
}

TEST_CASE("streaming purity equals the materialized double trace") {
    Grid g{5.0, 48, 1};
    std::mt19937 gen(77);
    std::normal_distribution<double> dist;
    GuideSet guides;
    for (int k = 0; k < 20; ++k) {
        ScalarField f = ScalarField::zeros(g);
        for (double& v : f.values) v = dist(gen);
        normalize(f);
        guides.waves.push_back(f);
    }
    const DensityMatrix rho = reduced_density_matrix(guides);
    const double purity_mat = 1.0 - linear_entropy(rho);
    CHECK(purity_streaming(guides) == doctest::Approx(purity_mat).epsilon(1e-8));
}

TEST_CASE("non-normalized input waves are rejected") {
    Grid g{5.0, 32, 1};
    GuideSet guides;
    ScalarField f = mode(g, 0);
    for (double& v : f.values) v *= 1.01;
    guides.waves.push_back(f);
    CHECK_THROWS_AS(reduced_density_matrix(guides), ConfigError);
}

TEST_CASE("guide density of identical Gaussians is that Gaussian's density") {
    Grid g{6.0, 96, 1};
    GuideSet guides;
    guides.waves.assign(7, mode(g, 0));
    const ScalarField dens = guide_density_profile(guides);
    for (int i = 0; i < g.points_per_axis; i += 9)
        CHECK(dens.values[i] ==
              doctest::Approx(guides.waves[0].values[i] * guides.waves[0].values[i])
                  .epsilon(1e-12));
}

TEST_CASE("walker histogram of many Gaussian samples matches the density") {
    Grid g{8.0, 64, 1};
    const NormalSource rng{4242};
    WalkerCloud cloud;
    cloud.dimension = 1;
    const int M = 1000000;
    cloud.positions.resize(M);
    for (int k = 0; k < M; ++k) {
        double z0, z1;
        rng.walker_pair(2, 0, static_cast<std::uint64_t>(k), z0, z1);
        cloud.positions[k] = z0 * std::sqrt(0.5);  // |phi0|^2 sample
    }
    const ScalarField hist = walker_density_profile(cloud, g);
    double l1 = 0.0;
    const double h = g.spacing();
    for (int i = 0; i < g.points_per_axis; ++i) {
        const double x = g.coord(i);
        const double dens = std::exp(-x * x) / std::sqrt(M_PI);
        l1 += std::abs(hist.values[i] - dens) * h;
    }
    CHECK(l1 < 0.02);

    WalkerCloud empty;
    empty.dimension = 1;
    CHECK_THROWS_AS(walker_density_profile(empty, g), ConfigError);
}
