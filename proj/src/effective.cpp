#include "tdqmc/effective.hpp"

#include <fftw3.h>

#include <complex>
#include <algorithm>
#include <cmath>
#include <mutex>

namespace tdqmc {

std::vector<double> bin_cloud(const WalkerCloud& cloud, const Grid& grid) {
    const int n = grid.points_per_axis;
    const double h = grid.spacing();
    const double L = grid.half_extent;
    std::vector<double> density(grid.size(), 0.0);
    const int M = cloud.walker_count();
    for (int k = 0; k < M; ++k) {
        const auto r = cloud.walker(k);
        double tx = (r[0] + L) / h;
        tx = std::clamp(tx, 0.0, static_cast<double>(n - 1));
        const int ix = std::min(static_cast<int>(tx), n - 2);
        const double fx = tx - ix;
        if (grid.dimension == 1) {
            density[ix] += 1.0 - fx;
            density[ix + 1] += fx;
        } else {
            double ty = (r[1] + L) / h;
            ty = std::clamp(ty, 0.0, static_cast<double>(n - 1));
            const int iy = std::min(static_cast<int>(ty), n - 2);
            const double fy = ty - iy;
            const std::size_t row = static_cast<std::size_t>(iy) * n;
            density[row + ix] += (1.0 - fx) * (1.0 - fy);
            density[row + ix + 1] += fx * (1.0 - fy);
            density[row + n + ix] += (1.0 - fx) * fy;
            density[row + n + ix + 1] += fx * fy;
        }
    }
    return density;
}

std::vector<double> pair_offset_table(const Grid& grid, const PhysicalParams& params) {
    const int n = grid.points_per_axis;
    const double h = grid.spacing();
    std::vector<double> vd(2 * n);
    for (int m = 0; m < 2 * n; ++m) vd[m] = pair_potential_r(m * h, params);
    return vd;
}

ColumnTable1D::ColumnTable1D(const std::vector<double>& density, const Grid& grid,
                             const std::vector<double>& vd, double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("column table sigma must be > 0");
    const int n = grid.points_per_axis;
    const double h = grid.spacing();
    const double L = grid.half_extent;
    n_ = n;
    // kernel-center spacing ~ sigma/3, cubic interpolation across columns
    dc_ = std::max(sigma / 3.0, h);
    ncols_ = std::max(static_cast<int>(std::ceil(2.0 * L / dc_)) + 4, 8);
    dc_ = 2.0 * L / (ncols_ - 3);
    c0_ = -L - dc_;  // one pad column each side for the cubic stencil
    cols_.assign(static_cast<std::size_t>(ncols_) * n, 0.0);

    const double inv_2s2 = 0.5 / (sigma * sigma);
    const int supp = std::min(n - 1, static_cast<int>(std::ceil(4.5 * sigma / h)) + 1);
    std::vector<double> w(n);
    for (int q = 0; q < ncols_; ++q) {
        const double c = c0_ + q * dc_;
        const int yc = static_cast<int>(std::floor((c + L) / h + 0.5));
        const int y_lo = std::max(0, yc - supp);
        const int y_hi = std::min(n - 1, yc + supp);
        double z = 0.0;
        for (int y = y_lo; y <= y_hi; ++y) {
            const double dy = grid.coord(y) - c;
            const double g = std::exp(-dy * dy * inv_2s2) * density[y];
            w[y] = g;
            z += g;
        }
        double* col = cols_.data() + static_cast<std::size_t>(q) * n;
        if (!(z > 1e-300)) {
            // no cloud mass near this center: the nearest walker is > 4.5 sigma
            // away, so this column is never gathered; use the bare potential
            const int ycc = std::clamp(yc, 0, n - 1);
            for (int ix = 0; ix < n; ++ix) col[ix] = vd[std::abs(ix - ycc)];
            continue;
        }
        const double inv_z = 1.0 / z;
        for (int y = y_lo; y <= y_hi; ++y) {
            const double wy = w[y] * inv_z;
            if (wy == 0.0) continue;
            for (int ix = 0; ix < n; ++ix) col[ix] += wy * vd[std::abs(ix - y)];
        }
    }
}

void ColumnTable1D::gather_strided(double c, double* out, int stride) const {
    double u = (c - c0_) / dc_;
    u = std::clamp(u, 1.0, static_cast<double>(ncols_ - 3));
    int q0 = std::min(static_cast<int>(u), ncols_ - 3);
    q0 = std::max(q0, 1);
    const double f = u - q0;
    const double f2 = f * f, f3 = f2 * f;
    const double w0 = -0.5 * f3 + f2 - 0.5 * f;
    const double w1 = 1.5 * f3 - 2.5 * f2 + 1.0;
    const double w2 = -1.5 * f3 + 2.0 * f2 + 0.5 * f;
    const double w3 = 0.5 * f3 - 0.5 * f2;
    const double* c0p = cols_.data() + static_cast<std::size_t>(q0 - 1) * n_;
    const double* c1p = c0p + n_;
    const double* c2p = c1p + n_;
    const double* c3p = c2p + n_;
    if (stride == 1) {
        for (int i = 0; i < n_; ++i)
            out[i] += w0 * c0p[i] + w1 * c1p[i] + w2 * c2p[i] + w3 * c3p[i];
    } else {
        for (int i = 0; i < n_; ++i)
            out[static_cast<std::size_t>(i) * stride] +=
                w0 * c0p[i] + w1 * c1p[i] + w2 * c2p[i] + w3 * c3p[i];
    }
}

std::vector<double> hartree_field_1d(const std::vector<double>& density, const Grid& grid,
                                     const std::vector<double>& vd) {
    const int n = grid.points_per_axis;
    std::vector<double> out(n, 0.0);
    double mass = 0.0;
    for (double d : density) mass += d;
    if (!(mass > 0.0)) return out;
    const double inv_m = 1.0 / mass;
    for (int y = 0; y < n; ++y) {
        const double wy = density[y] * inv_m;
        if (wy == 0.0) continue;
        for (int ix = 0; ix < n; ++ix) out[ix] += wy * vd[std::abs(ix - y)];
    }
    return out;
}

namespace {
std::mutex fftw_plan_mutex;
}

struct PairConvolver2D::Impl {
    int n = 0;
    int np = 0;            // padded size 2n
    std::size_t nc = 0;    // complex row length np/2+1
    std::vector<double> vhat_re, vhat_im;
    fftw_plan fwd = nullptr, bwd = nullptr;

    ~Impl() {
        std::lock_guard<std::mutex> lk(fftw_plan_mutex);
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

namespace {

struct ThreadFFTBuffers {
    std::vector<double> real;
    std::vector<std::complex<double>> cplx;
};

ThreadFFTBuffers& thread_buffers(std::size_t rsize, std::size_t csize) {
    thread_local ThreadFFTBuffers buf;
    if (buf.real.size() < rsize) buf.real.resize(rsize);
    if (buf.cplx.size() < csize) buf.cplx.resize(csize);
    return buf;
}

} // namespace

PairConvolver2D::PairConvolver2D(const Grid& grid, const PhysicalParams& params)
    : impl_(std::make_unique<Impl>()) {
    if (grid.dimension != 2) throw ConfigError("PairConvolver2D needs a 2D grid");
    const int n = grid.points_per_axis;
    const int np = 2 * n;
    const double h = grid.spacing();
    impl_->n = n;
    impl_->np = np;
    impl_->nc = static_cast<std::size_t>(np) * (np / 2 + 1);

    std::vector<double> ker(static_cast<std::size_t>(np) * np);
    for (int iy = 0; iy < np; ++iy) {
        const int oy = (iy < n) ? iy : iy - np;  // signed offset, wrap-aligned
        for (int ix = 0; ix < np; ++ix) {
            const int ox = (ix < n) ? ix : ix - np;
            const double r = h * std::sqrt(static_cast<double>(ox) * ox +
                                           static_cast<double>(oy) * oy);
            ker[static_cast<std::size_t>(iy) * np + ix] = pair_potential_r(r, params);
        }
    }
    std::vector<std::complex<double>> khat_v(impl_->nc);
    fftw_complex* khat = reinterpret_cast<fftw_complex*>(khat_v.data());
    {
        std::lock_guard<std::mutex> lk(fftw_plan_mutex);
        impl_->fwd = fftw_plan_dft_r2c_2d(np, np, ker.data(), khat, FFTW_ESTIMATE);
        impl_->bwd = fftw_plan_dft_c2r_2d(np, np, khat, ker.data(), FFTW_ESTIMATE);
    }
    std::vector<double> pad(static_cast<std::size_t>(np) * np, 0.0);
    // recompute kernel (the plan creation may scribble on buffers)
    for (int iy = 0; iy < np; ++iy) {
        const int oy = (iy < n) ? iy : iy - np;
        for (int ix = 0; ix < np; ++ix) {
            const int ox = (ix < n) ? ix : ix - np;
            const double r = h * std::sqrt(static_cast<double>(ox) * ox +
                                           static_cast<double>(oy) * oy);
            pad[static_cast<std::size_t>(iy) * np + ix] = pair_potential_r(r, params);
        }
    }
    fftw_execute_dft_r2c(impl_->fwd, pad.data(), khat);
    impl_->vhat_re.resize(impl_->nc);
    impl_->vhat_im.resize(impl_->nc);
    const double scale = 1.0 / (static_cast<double>(np) * np);
    for (std::size_t i = 0; i < impl_->nc; ++i) {
        impl_->vhat_re[i] = khat_v[i].real() * scale;
        impl_->vhat_im[i] = khat_v[i].imag() * scale;
    }
}

PairConvolver2D::~PairConvolver2D() = default;

void PairConvolver2D::convolve(const double* w, double* out) const {
    const int n = impl_->n;
    const int np = impl_->np;
    const std::size_t rsize = static_cast<std::size_t>(np) * np;
    ThreadFFTBuffers& buf = thread_buffers(rsize, impl_->nc);
    std::fill(buf.real.begin(), buf.real.begin() + rsize, 0.0);
    for (int iy = 0; iy < n; ++iy)
        std::copy(w + static_cast<std::size_t>(iy) * n, w + static_cast<std::size_t>(iy) * n + n,
                  buf.real.begin() + static_cast<std::size_t>(iy) * np);
    fftw_complex* cx = reinterpret_cast<fftw_complex*>(buf.cplx.data());
    fftw_execute_dft_r2c(impl_->fwd, buf.real.data(), cx);
    for (std::size_t i = 0; i < impl_->nc; ++i) {
        const double re = cx[i][0], im = cx[i][1];
        cx[i][0] = re * impl_->vhat_re[i] - im * impl_->vhat_im[i];
        cx[i][1] = re * impl_->vhat_im[i] + im * impl_->vhat_re[i];
    }
    fftw_execute_dft_c2r(impl_->bwd, cx, buf.real.data());
    for (int iy = 0; iy < n; ++iy)
        std::copy(buf.real.begin() + static_cast<std::size_t>(iy) * np,
                  buf.real.begin() + static_cast<std::size_t>(iy) * np + n,
                  out + static_cast<std::size_t>(iy) * n);
}

bool accumulate_weighted_density_2d(const std::vector<double>& density, const Grid& grid,
                                    const double* center, double sigma, std::vector<double>& wc) {
    const int n = grid.points_per_axis;
    const double inv_2s2 = 0.5 / (sigma * sigma);
    thread_local std::vector<double> gx, gy;
    gx.resize(n);
    gy.resize(n);
    for (int i = 0; i < n; ++i) {
        const double dx = grid.coord(i) - center[0];
        const double dy = grid.coord(i) - center[1];
        gx[i] = std::exp(-dx * dx * inv_2s2);
        gy[i] = std::exp(-dy * dy * inv_2s2);
    }
    double z = 0.0;
    for (int iy = 0; iy < n; ++iy) {
        const double* drow = density.data() + static_cast<std::size_t>(iy) * n;
        double acc = 0.0;
        for (int ix = 0; ix < n; ++ix) acc += drow[ix] * gx[ix];
        z += acc * gy[iy];
    }
    if (!(z > 1e-300)) return false;
    const double inv_z = 1.0 / z;
    for (int iy = 0; iy < n; ++iy) {
        const double* drow = density.data() + static_cast<std::size_t>(iy) * n;
        double* wrow = wc.data() + static_cast<std::size_t>(iy) * n;
        const double gyz = gy[iy] * inv_z;
        for (int ix = 0; ix < n; ++ix) wrow[ix] += drow[ix] * gx[ix] * gyz;
    }
    return true;
}

} // namespace tdqmc
