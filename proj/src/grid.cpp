#include "tdqmc/grid.hpp"

#include <algorithm>
#include <cmath>

namespace tdqmc {

namespace {

// Multilinear interpolation support: cell index and fraction along one axis,
// clamping the position to the domain.
struct AxisLocate {
    int i0;
    double frac;
    bool clamped;
};

AxisLocate locate(const Grid& g, double x) {
    AxisLocate loc{0, 0.0, false};
    const double h = g.spacing();
    double t = (x + g.half_extent) / h;
    if (t < 0.0) { t = 0.0; loc.clamped = true; }
    const double tmax = static_cast<double>(g.points_per_axis - 1);
    if (t > tmax) { t = tmax; loc.clamped = true; }
    loc.i0 = std::min(static_cast<int>(t), g.points_per_axis - 2);
    loc.frac = t - loc.i0;
    return loc;
}

inline double at(const std::vector<double>& v, const Grid& g, int ix, int iy) {
    return v[static_cast<std::size_t>(iy) * g.points_per_axis + ix];
}

// phi with Dirichlet zeros outside the domain
inline double at_ext(const std::vector<double>& v, const Grid& g, int ix, int iy) {
    if (ix < 0 || iy < 0 || ix >= g.points_per_axis || iy >= g.points_per_axis) return 0.0;
    return at(v, g, ix, iy);
}

inline double lap_node_1d(const std::vector<double>& v, int i, int n, double inv_h2) {
    const double l = (i > 0) ? v[i - 1] : 0.0;
    const double r = (i < n - 1) ? v[i + 1] : 0.0;
    return (l - 2.0 * v[i] + r) * inv_h2;
}

inline double lap_node_2d(const std::vector<double>& v, const Grid& g, int ix, int iy,
                          double inv_h2) {
    const double c = at(v, g, ix, iy);
    return (at_ext(v, g, ix - 1, iy) + at_ext(v, g, ix + 1, iy) + at_ext(v, g, ix, iy - 1) +
            at_ext(v, g, ix, iy + 1) - 4.0 * c) * inv_h2;
}

// Thomas solve of (I + dtau * (K + V)) out = rhs for the 1D tridiagonal H.
void backward_euler_1d(std::vector<double>& phi, const std::vector<double>& pot, double dtau,
                       double kin) {
    const int n = static_cast<int>(phi.size());
    thread_local std::vector<double> cp, dp;
    cp.resize(n);
    dp.resize(n);
    const double off = -dtau * kin;
    double diag = 1.0 + dtau * (2.0 * kin + pot[0]);
    cp[0] = off / diag;
    dp[0] = phi[0] / diag;
    for (int i = 1; i < n; ++i) {
        const double m = 1.0 + dtau * (2.0 * kin + pot[i]) - off * cp[i - 1];
        cp[i] = off / m;
        dp[i] = (phi[i] - off * dp[i - 1]) / m;
    }
    phi[n - 1] = dp[n - 1];
    for (int i = n - 2; i >= 0; --i) phi[i] = dp[i] - cp[i] * phi[i + 1];
}

// y = (I + dtau*(K + V)) x on the 2D five-point stencil.
void apply_be_operator_2d(const Grid& g, const std::vector<double>& x,
                          const std::vector<double>& pot, double dtau, double kin,
                          std::vector<double>& y) {
    const int n = g.points_per_axis;
    for (int iy = 0; iy < n; ++iy) {
        const std::size_t row = static_cast<std::size_t>(iy) * n;
        for (int ix = 0; ix < n; ++ix) {
            const std::size_t id = row + ix;
            double acc = (1.0 + dtau * (4.0 * kin + pot[id])) * x[id];
            if (ix > 0) acc -= dtau * kin * x[id - 1];
            if (ix < n - 1) acc -= dtau * kin * x[id + 1];
            if (iy > 0) acc -= dtau * kin * x[id - n];
            if (iy < n - 1) acc -= dtau * kin * x[id + n];
            y[id] = acc;
        }
    }
}

// Warm-started CG for (I + dtau*(K+V)) out = rhs; the operator is SPD with
// condition number ~ 1 + dtau*lambda_max, so a handful of iterations suffice.
void backward_euler_2d(const Grid& g, std::vector<double>& phi, const std::vector<double>& pot,
                       double dtau, double kin) {
    const std::size_t sz = phi.size();
    thread_local std::vector<double> r, p, Ap, x;
    r.resize(sz);
    p.resize(sz);
    Ap.resize(sz);
    x = phi;  // warm start: solution is close to rhs for small dtau

    apply_be_operator_2d(g, x, pot, dtau, kin, Ap);
    double rr = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < sz; ++i) {
        r[i] = phi[i] - Ap[i];
        p[i] = r[i];
        rr += r[i] * r[i];
        bb += phi[i] * phi[i];
    }
    const double tol2 = 1e-24 * bb;
    for (int it = 0; it < 500 && rr > tol2; ++it) {
        apply_be_operator_2d(g, p, pot, dtau, kin, Ap);
        double pAp = 0.0;
        for (std::size_t i = 0; i < sz; ++i) pAp += p[i] * Ap[i];
        const double alpha = rr / pAp;
        double rr_new = 0.0;
        for (std::size_t i = 0; i < sz; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
            rr_new += r[i] * r[i];
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < sz; ++i) p[i] = r[i] + beta * p[i];
    }
    phi = x;
}

} // namespace

ScalarField laplacian_apply(const ScalarField& field) {
    const Grid& g = field.grid;
    ScalarField out = ScalarField::zeros(g);
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    const int n = g.points_per_axis;
    if (g.dimension == 1) {
        for (int i = 0; i < n; ++i) out.values[i] = lap_node_1d(field.values, i, n, inv_h2);
    } else {
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix)
                out.values[static_cast<std::size_t>(iy) * n + ix] =
                    lap_node_2d(field.values, g, ix, iy, inv_h2);
    }
    return out;
}

double squared_norm(const ScalarField& field) {
    double s = 0.0;
    for (double v : field.values) s += v * v;
    double hd = field.grid.spacing();
    if (field.grid.dimension == 2) hd *= field.grid.spacing();
    return s * hd;
}

void normalize(ScalarField& field) {
    const double n2 = squared_norm(field);
    if (!(n2 > 1e-300) || !std::isfinite(n2)) throw CollapsedWave();
    const double inv = 1.0 / std::sqrt(n2);
    for (double& v : field.values) v *= inv;
}

void imaginary_time_step(ScalarField& field, const ScalarField& potential, double dtau) {
    if (!(dtau > 0.0)) throw ConfigError("dtau must be > 0");
    const Grid& g = field.grid;
    const double kin = 0.5 / (g.spacing() * g.spacing());
    if (g.dimension == 1) {
        backward_euler_1d(field.values, potential.values, dtau, kin);
    } else {
        backward_euler_2d(g, field.values, potential.values, dtau, kin);
    }
    normalize(field);
}

double rayleigh_energy(const ScalarField& field, const ScalarField& potential) {
    const Grid& g = field.grid;
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    const int n = g.points_per_axis;
    double num = 0.0, den = 0.0;
    if (g.dimension == 1) {
        for (int i = 0; i < n; ++i) {
            const double hp = -0.5 * lap_node_1d(field.values, i, n, inv_h2) +
                              potential.values[i] * field.values[i];
            num += field.values[i] * hp;
            den += field.values[i] * field.values[i];
        }
    } else {
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t id = static_cast<std::size_t>(iy) * n + ix;
                const double hp = -0.5 * lap_node_2d(field.values, g, ix, iy, inv_h2) +
                                  potential.values[id] * field.values[id];
                num += field.values[id] * hp;
                den += field.values[id] * field.values[id];
            }
    }
    return num / den;
}

double probe_value(const ScalarField& field, std::span<const double> position) {
    const Grid& g = field.grid;
    const AxisLocate lx = locate(g, position[0]);
    if (g.dimension == 1) {
        return field.values[lx.i0] * (1.0 - lx.frac) + field.values[lx.i0 + 1] * lx.frac;
    }
    const AxisLocate ly = locate(g, position[1]);
    const double w00 = (1.0 - lx.frac) * (1.0 - ly.frac);
    const double w10 = lx.frac * (1.0 - ly.frac);
    const double w01 = (1.0 - lx.frac) * ly.frac;
    const double w11 = lx.frac * ly.frac;
    return at(field.values, g, lx.i0, ly.i0) * w00 + at(field.values, g, lx.i0 + 1, ly.i0) * w10 +
           at(field.values, g, lx.i0, ly.i0 + 1) * w01 +
           at(field.values, g, lx.i0 + 1, ly.i0 + 1) * w11;
}

namespace {

// Central-difference gradient component at a node (one-sided at edges via
// Dirichlet zeros outside).
inline double grad_node_1d(const std::vector<double>& v, int i, int n, double inv_2h) {
    const double l = (i > 0) ? v[i - 1] : 0.0;
    const double r = (i < n - 1) ? v[i + 1] : 0.0;
    return (r - l) * inv_2h;
}

inline double grad_node_2d(const std::vector<double>& v, const Grid& g, int ix, int iy, int axis,
                           double inv_2h) {
    if (axis == 0) return (at_ext(v, g, ix + 1, iy) - at_ext(v, g, ix - 1, iy)) * inv_2h;
    return (at_ext(v, g, ix, iy + 1) - at_ext(v, g, ix, iy - 1)) * inv_2h;
}

} // namespace

ProbeResult probe_log_gradient(const ScalarField& field, std::span<const double> position) {
    const Grid& g = field.grid;
    const int n = g.points_per_axis;
    const double inv_2h = 0.5 / g.spacing();
    ProbeResult res;
    const AxisLocate lx = locate(g, position[0]);
    if (g.dimension == 1) {
        res.clamped = lx.clamped;
        const double phi =
            field.values[lx.i0] * (1.0 - lx.frac) + field.values[lx.i0 + 1] * lx.frac;
        if (std::abs(phi) < 1e-12) {
            res.node = true;
            return res;
        }
        const double gv = grad_node_1d(field.values, lx.i0, n, inv_2h) * (1.0 - lx.frac) +
                          grad_node_1d(field.values, lx.i0 + 1, n, inv_2h) * lx.frac;
        res.grad[0] = gv / phi;
        return res;
    }
    const AxisLocate ly = locate(g, position[1]);
    res.clamped = lx.clamped || ly.clamped;
    const double w[4] = {(1.0 - lx.frac) * (1.0 - ly.frac), lx.frac * (1.0 - ly.frac),
                         (1.0 - lx.frac) * ly.frac, lx.frac * ly.frac};
    const int xs[4] = {lx.i0, lx.i0 + 1, lx.i0, lx.i0 + 1};
    const int ys[4] = {ly.i0, ly.i0, ly.i0 + 1, ly.i0 + 1};
    double phi = 0.0;
    for (int c = 0; c < 4; ++c) phi += w[c] * at(field.values, g, xs[c], ys[c]);
    if (std::abs(phi) < 1e-12) {
        res.node = true;
        return res;
    }
    for (int axis = 0; axis < 2; ++axis) {
        double gv = 0.0;
        for (int c = 0; c < 4; ++c)
            gv += w[c] * grad_node_2d(field.values, g, xs[c], ys[c], axis, inv_2h);
        res.grad[axis] = gv / phi;
    }
    return res;
}

double probe_kinetic(const ScalarField& field, std::span<const double> position, bool* node) {
    const Grid& g = field.grid;
    const int n = g.points_per_axis;
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    const AxisLocate lx = locate(g, position[0]);
    if (node) *node = false;
    if (g.dimension == 1) {
        const double phi =
            field.values[lx.i0] * (1.0 - lx.frac) + field.values[lx.i0 + 1] * lx.frac;
        if (std::abs(phi) < 1e-12) {
            if (node) *node = true;
            return 0.0;
        }
        const double lv = lap_node_1d(field.values, lx.i0, n, inv_h2) * (1.0 - lx.frac) +
                          lap_node_1d(field.values, lx.i0 + 1, n, inv_h2) * lx.frac;
        return -0.5 * lv / phi;
    }
    const AxisLocate ly = locate(g, position[1]);
    const double w[4] = {(1.0 - lx.frac) * (1.0 - ly.frac), lx.frac * (1.0 - ly.frac),
                         (1.0 - lx.frac) * ly.frac, lx.frac * ly.frac};
    const int xs[4] = {lx.i0, lx.i0 + 1, lx.i0, lx.i0 + 1};
    const int ys[4] = {ly.i0, ly.i0, ly.i0 + 1, ly.i0 + 1};
    double phi = 0.0, lv = 0.0;
    for (int c = 0; c < 4; ++c) {
        phi += w[c] * at(field.values, g, xs[c], ys[c]);
        lv += w[c] * lap_node_2d(field.values, g, xs[c], ys[c], inv_h2);
    }
    if (std::abs(phi) < 1e-12) {
        if (node) *node = true;
        return 0.0;
    }
    return -0.5 * lv / phi;
}

} // namespace tdqmc
