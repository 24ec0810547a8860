#ifndef TDQMC_EFFECTIVE_HPP
#define TDQMC_EFFECTIVE_HPP

#include <memory>
#include <vector>

#include "tdqmc/ensemble.hpp"

namespace tdqmc {

// Production-scale effective-potential machinery. Walker clouds are binned
// onto the grid (cloud-in-cell), the pair potential enters through grid
// tables, and per-walker kernel weighting reduces to cheap per-step tables:
// in 1D a set of normalized kernel columns interpolated in the kernel
// center, in 2D a per-walker FFT convolution of the kernel-weighted density.
// Agreement with ensemble::effective_potential_field is O(h^2) and covered
// by property tests.

// CIC-binned cloud mass on grid nodes; sums to M.
std::vector<double> bin_cloud(const WalkerCloud& cloud, const Grid& grid);

// Radial pair-potential table on grid offsets: vd[m] = V(m*h), m in [0, 2n).
std::vector<double> pair_offset_table(const Grid& grid, const PhysicalParams& params);

// 1D: normalized effective-potential columns U(x | c_q) for kernel centers
// c_q on a sigma-adaptive grid; gather() blends columns at an off-grid kernel
// center with a Catmull-Rom cubic (a convex blend of convex combinations).
class ColumnTable1D {
public:
    ColumnTable1D(const std::vector<double>& density, const Grid& grid,
                  const std::vector<double>& vd, double sigma);
    // out += interpolated column at kernel center c
    void gather(double c, double* out) const { gather_strided(c, out, 1); }
    void gather_strided(double c, double* out, int stride) const;
    int column_count() const { return ncols_; }

private:
    double c0_ = 0.0, dc_ = 1.0;
    int ncols_ = 0, n_ = 0;
    std::vector<double> cols_;
};

// 1D Hartree limit: single uniform-weight column (1/M) sum_l V(x - r_l).
std::vector<double> hartree_field_1d(const std::vector<double>& density, const Grid& grid,
                                     const std::vector<double>& vd);

// 2D: linear convolution with the pair potential on a zero-padded grid.
// Plans are created once; execution is thread-safe on per-thread buffers.
class PairConvolver2D {
public:
    PairConvolver2D(const Grid& grid, const PhysicalParams& params);
    ~PairConvolver2D();
    PairConvolver2D(const PairConvolver2D&) = delete;
    PairConvolver2D& operator=(const PairConvolver2D&) = delete;

    // out = (V * w) on the n x n grid, w given on the n x n grid.
    void convolve(const double* w, double* out) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// 2D kernel-weighted normalized density for one (j, k) source:
// w(y) = D(y) g(y1 - c1) g(y2 - c2) / Z, accumulated into wc.
// Returns false (and adds nothing) when the kernel mass underflows.
bool accumulate_weighted_density_2d(const std::vector<double>& density, const Grid& grid,
                                    const double* center, double sigma, std::vector<double>& wc);

} // namespace tdqmc

#endif
