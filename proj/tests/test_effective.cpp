#include <doctest.h>

#include <cmath>
#include <random>

#include "tdqmc/effective.hpp"

using namespace tdqmc;

namespace {

WalkerCloud random_cloud(std::mt19937& gen, int M, int d, double spread) {
    std::normal_distribution<double> dist(0.0, spread);
    WalkerCloud c;
    c.dimension = d;
    c.positions.resize(static_cast<std::size_t>(M) * d);
    for (double& x : c.positions) x = dist(gen);
    c.sample_stddev = sample_stddev(c);
    return c;
}

} // namespace

TEST_CASE("cloud binning conserves mass and is exact on nodes") {
    Grid g{8.0, 33, 1};  // h = 0.5
    WalkerCloud c;
    c.dimension = 1;
    c.positions = {0.0, 0.5, -1.5, 3.0, 0.0};
    const std::vector<double> d = bin_cloud(c, g);
    double mass = 0.0;
    for (double v : d) mass += v;
    CHECK(mass == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(d[16] == doctest::Approx(2.0));  // two walkers at x=0
    CHECK(d[17] == doctest::Approx(1.0));
    CHECK(d[13] == doctest::Approx(1.0));
}

TEST_CASE("1D column tables agree with the exact effective potential") {
    Grid g{8.0, 192, 1};
    std::mt19937 gen(5);
    for (double a : {0.0, 3.0}) {
        const PhysicalParams params{2, 1, a, 1.0};
        const std::vector<double> vd = pair_offset_table(g, params);
        for (double sigma : {0.35, 0.8, 2.0}) {
            WalkerCloud src = random_cloud(gen, 40, 1, 0.9);
            src.nonlocal_length = sigma;
            WalkerCloud self = random_cloud(gen, 40, 1, 0.9);
            self.nonlocal_length = sigma;
            std::vector<WalkerCloud> clouds{self, src};

            const ColumnTable1D table(bin_cloud(src, g), g, vd, sigma);
            for (int k : {0, 7, 39}) {
                const ScalarField exact = effective_potential_field(0, k, clouds, params, g);
                std::vector<double> fast(g.size(), 0.0);
                table.gather(src.positions[k], fast.data());
                double worst = 0.0;
                for (std::size_t i = 0; i < fast.size(); ++i)
                    worst = std::max(worst, std::abs(fast[i] - exact.values[i]));
                // cloud-in-cell error grows with potential curvature; the
                // screened potential has a |x| kink at the source
                CHECK(worst < (a > 0.0 ? 8e-3 : 2e-3));
            }
        }
    }
}

TEST_CASE("1D hartree column agrees with the exact uniform-weight field") {
    Grid g{8.0, 192, 1};
    const PhysicalParams params = long_range(2, 1);
    const std::vector<double> vd = pair_offset_table(g, params);
    std::mt19937 gen(17);
    WalkerCloud src = random_cloud(gen, 64, 1, 0.8);
    src.nonlocal_length = 1.0;
    std::vector<WalkerCloud> clouds{random_cloud(gen, 64, 1, 0.8), src};
    const ScalarField exact =
        effective_potential_field(0, 0, clouds, params, g, RunMode::hartree);
    const std::vector<double> fast = hartree_field_1d(bin_cloud(src, g), g, vd);
    double worst = 0.0;
    for (std::size_t i = 0; i < fast.size(); ++i)
        worst = std::max(worst, std::abs(fast[i] - exact.values[i]));
    CHECK(worst < 1e-3);
}

TEST_CASE("2D FFT convolution path agrees with the exact effective potential") {
    Grid g{6.0, 48, 2};
    std::mt19937 gen(23);
    for (double a : {0.0, 3.0}) {
        const PhysicalParams params{2, 2, a, 1.0};
        const PairConvolver2D conv(g, params);
        WalkerCloud src = random_cloud(gen, 48, 2, 0.8);
        src.nonlocal_length = 0.9;
        WalkerCloud self = random_cloud(gen, 48, 2, 0.8);
        self.nonlocal_length = 0.9;
        std::vector<WalkerCloud> clouds{self, src};
        const std::vector<double> density = bin_cloud(src, g);
        for (int k : {0, 11}) {
            const ScalarField exact = effective_potential_field(0, k, clouds, params, g);
            std::vector<double> wc(g.size(), 0.0), fast(g.size(), 0.0);
            REQUIRE(accumulate_weighted_density_2d(density, g, src.walker(k).data(),
                                                   src.nonlocal_length, wc));
            conv.convolve(wc.data(), fast.data());
            double worst = 0.0;
            for (std::size_t i = 0; i < fast.size(); ++i)
                worst = std::max(worst, std::abs(fast[i] - exact.values[i]));
            CHECK(worst < 6e-3);  // CIC binning error at h ~ 0.26
        }
    }
}

TEST_CASE("2D convolver reproduces a point-source pair potential") {
    Grid g{6.0, 32, 2};
    const PhysicalParams params = long_range(2, 2);
    const PairConvolver2D conv(g, params);
    std::vector<double> w(g.size(), 0.0);
    const int n = g.points_per_axis;
    const int cx = 20, cy = 13;
    w[static_cast<std::size_t>(cy) * n + cx] = 1.0;  // unit mass on a node
    std::vector<double> out(g.size(), 0.0);
    conv.convolve(w.data(), out.data());
    for (int iy = 0; iy < n; iy += 5)
        for (int ix = 0; ix < n; ix += 5) {
            const double dx = g.coord(ix) - g.coord(cx);
            const double dy = g.coord(iy) - g.coord(cy);
            const double expected = pair_potential_r(std::hypot(dx, dy), params);
            CHECK(out[static_cast<std::size_t>(iy) * n + ix] ==
                  doctest::Approx(expected).epsilon(1e-9));
        }
}
