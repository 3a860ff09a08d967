#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "viscotherm/coefficients.hpp"
#include "viscotherm/common.hpp"

namespace viscotherm {

struct Grid {
    int nx = 0, ny = 0;
    double Lx = 0.0, Ly = 0.0;

    double dx() const { return Lx / nx; }
    double dy() const { return Ly / ny; }
    int cells() const { return nx * ny; }

    void validate() const {
        if (nx < 8 || ny < 8) throw ConfigError("grid: nx and ny must be >= 8");
        if (!(Lx > 0.0) || !(Ly > 0.0)) throw ConfigError("grid: Lx and Ly must be positive");
    }
};

/// Doubly periodic collocated fields (u, v, rho, T); index (i, j) maps to
/// (x, y) = (i dx, j dy), storage row-major with x fastest.
struct SimState {
    Grid grid;
    double t = 0.0;
    std::vector<double> u, v, rho, T;

    static SimState zeros(const Grid& g) {
        SimState s;
        s.grid = g;
        s.u.assign(g.cells(), 0.0);
        s.v.assign(g.cells(), 0.0);
        s.rho.assign(g.cells(), 1.0);
        s.T.assign(g.cells(), 1.0);
        return s;
    }

    int idx(int i, int j) const { return j * grid.nx + i; }
};

/// Constant viscosities and transport coefficients of the plane solver; the
/// pressures p(rho, T) and q(rho, T) may vary through the coefficient model.
struct SimCoefficients {
    double mu = 0.0, tau = 0.0, zeta = 0.0, alpha = 0.0;
    double c_p = 1.0, kappa_th = 0.0;
    ScalarField p, q;

    static SimCoefficients from_model(const CoefficientModel& m) {
        auto constant_of = [](const ScalarField& f, const char* name) {
            if (!f.is_constant())
                throw ConfigError(std::string("plane solver: coefficient ") + name +
                                  " must be constant");
            return f.constant_value();
        };
        SimCoefficients c;
        c.mu = constant_of(m.mu, "mu");
        c.tau = constant_of(m.tau, "tau");
        c.zeta = constant_of(m.zeta, "zeta");
        c.alpha = constant_of(m.alpha, "alpha");
        c.c_p = constant_of(m.c_p, "c_p");
        c.kappa_th = constant_of(m.kappa_th, "kappa_th");
        if (!(c.mu > 0.0)) throw ConfigError("plane solver: mu must be positive");
        if (!(c.c_p > 0.0)) throw ConfigError("plane solver: c_p must be positive");
        if (c.kappa_th < 0.0) throw ConfigError("plane solver: kappa_th must be >= 0");
        c.p = m.p;
        c.q = m.q;
        return c;
    }
};

namespace detail {

inline void check_state(const SimState& s, const char* where) {
    for (int k = 0; k < s.grid.cells(); ++k) {
        if (!std::isfinite(s.u[k]) || !std::isfinite(s.v[k]) || !std::isfinite(s.rho[k]) ||
            !std::isfinite(s.T[k]))
            throw NumericalAbortError(std::string(where) + ": non-finite field value");
        if (!(s.rho[k] > 0.0))
            throw NumericalAbortError(std::string(where) + ": non-positive density");
    }
}

inline std::vector<double> pointwise(const ScalarField& f, const SimState& s) {
    std::vector<double> out(s.grid.cells());
    parallel_for_chunks(s.grid.ny, [&](int j0, int j1) {
        for (int j = j0; j < j1; ++j)
            for (int i = 0; i < s.grid.nx; ++i) {
                const int k = s.idx(i, j);
                out[k] = f.value(s.rho[k], s.T[k]);
            }
    });
    return out;
}

}  // namespace detail

struct StressFields {
    std::vector<double> sxx, sxy, syx, syy;
};

/// Pointwise stress components of the plane model from the velocity
/// gradients (2nd-order central differences):
///   sxx = -p + (mu+zeta) u_x + (zeta-mu) v_y + alpha (u_y - v_x)
///   sxy = -q + (mu+tau)  u_y + (mu-tau)  v_x + alpha (u_x + v_y)
///   syx =  q + (mu-tau)  u_y + (mu+tau)  v_x - alpha (u_x + v_y)
///   syy = -p + (mu+zeta) v_y + (zeta-mu) u_x + alpha (u_y - v_x)
inline StressFields stress_field(const SimState& s, const SimCoefficients& c) {
    const int nx = s.grid.nx, ny = s.grid.ny;
    const double rdx = 1.0 / (2.0 * s.grid.dx()), rdy = 1.0 / (2.0 * s.grid.dy());
    StressFields f;
    f.sxx.resize(s.grid.cells());
    f.sxy.resize(s.grid.cells());
    f.syx.resize(s.grid.cells());
    f.syy.resize(s.grid.cells());
    const std::vector<double> p = detail::pointwise(c.p, s);
    const std::vector<double> q = detail::pointwise(c.q, s);
    parallel_for_chunks(ny, [&](int j0, int j1) {
        for (int j = j0; j < j1; ++j) {
            const int jp = (j + 1) % ny, jm = (j + ny - 1) % ny;
            for (int i = 0; i < nx; ++i) {
                const int ip = (i + 1) % nx, im = (i + nx - 1) % nx;
                const int k = s.idx(i, j);
                const double ux = (s.u[s.idx(ip, j)] - s.u[s.idx(im, j)]) * rdx;
                const double uy = (s.u[s.idx(i, jp)] - s.u[s.idx(i, jm)]) * rdy;
                const double vx = (s.v[s.idx(ip, j)] - s.v[s.idx(im, j)]) * rdx;
                const double vy = (s.v[s.idx(i, jp)] - s.v[s.idx(i, jm)]) * rdy;
                f.sxx[k] = -p[k] + (c.mu + c.zeta) * ux + (c.zeta - c.mu) * vy +
                           c.alpha * (uy - vx);
                f.sxy[k] = -q[k] + (c.mu + c.tau) * uy + (c.mu - c.tau) * vx +
                           c.alpha * (ux + vy);
                f.syx[k] = q[k] + (c.mu + c.tau) * vx + (c.mu - c.tau) * uy -
                           c.alpha * (ux + vy);
                f.syy[k] = -p[k] + (c.mu + c.zeta) * vy + (c.zeta - c.mu) * ux +
                           c.alpha * (uy - vx);
            }
        }
    });
    return f;
}

struct MomentumRhs {
    std::vector<double> du, dv;
};

/// Momentum right-hand sides solved from
///   rho (u_t + u u_x + v u_y) + p_x - q_y - (mu+zeta) u_xx + (tau-mu) u_yy
///       - (tau+zeta) v_xy + alpha (v_xx + v_yy) = 0
/// and the mirrored v equation. Mixed derivatives use the 4-point cross
/// stencil; all stencils are 2nd-order central.
inline MomentumRhs momentum_rhs(const SimState& s, const SimCoefficients& c) {
    detail::check_state(s, "momentum_rhs");
    const int nx = s.grid.nx, ny = s.grid.ny;
    const double dx = s.grid.dx(), dy = s.grid.dy();
    const double rdx = 1.0 / (2.0 * dx), rdy = 1.0 / (2.0 * dy);
    const double rdx2 = 1.0 / (dx * dx), rdy2 = 1.0 / (dy * dy);
    const double rdxy = 1.0 / (4.0 * dx * dy);
    MomentumRhs rhs;
    rhs.du.resize(s.grid.cells());
    rhs.dv.resize(s.grid.cells());
    const std::vector<double> p = detail::pointwise(c.p, s);
    const std::vector<double> q = detail::pointwise(c.q, s);
    parallel_for_chunks(ny, [&](int j0, int j1) {
        for (int j = j0; j < j1; ++j) {
            const int jp = (j + 1) % ny, jm = (j + ny - 1) % ny;
            for (int i = 0; i < nx; ++i) {
                const int ip = (i + 1) % nx, im = (i + nx - 1) % nx;
                const int k = s.idx(i, j);
                const int kip = s.idx(ip, j), kim = s.idx(im, j);
                const int kjp = s.idx(i, jp), kjm = s.idx(i, jm);
                const double ux = (s.u[kip] - s.u[kim]) * rdx;
                const double uy = (s.u[kjp] - s.u[kjm]) * rdy;
                const double vx = (s.v[kip] - s.v[kim]) * rdx;
                const double vy = (s.v[kjp] - s.v[kjm]) * rdy;
                const double uxx = (s.u[kip] - 2.0 * s.u[k] + s.u[kim]) * rdx2;
                const double uyy = (s.u[kjp] - 2.0 * s.u[k] + s.u[kjm]) * rdy2;
                const double vxx = (s.v[kip] - 2.0 * s.v[k] + s.v[kim]) * rdx2;
                const double vyy = (s.v[kjp] - 2.0 * s.v[k] + s.v[kjm]) * rdy2;
                // grouped so the stencil value is invariant under the x<->y swap
                const double uxy = ((s.u[s.idx(ip, jp)] + s.u[s.idx(im, jm)]) -
                                    (s.u[s.idx(ip, jm)] + s.u[s.idx(im, jp)])) *
                                   rdxy;
                const double vxy = ((s.v[s.idx(ip, jp)] + s.v[s.idx(im, jm)]) -
                                    (s.v[s.idx(ip, jm)] + s.v[s.idx(im, jp)])) *
                                   rdxy;
                const double px = (p[kip] - p[kim]) * rdx;
                const double py = (p[kjp] - p[kjm]) * rdy;
                const double qx = (q[kip] - q[kim]) * rdx;
                const double qy = (q[kjp] - q[kjm]) * rdy;
                const double inv_rho = 1.0 / s.rho[k];
                rhs.du[k] = -(s.u[k] * ux + s.v[k] * uy) +
                            (-px + qy + (c.mu + c.zeta) * uxx - (c.tau - c.mu) * uyy +
                             (c.tau + c.zeta) * vxy - c.alpha * (vxx + vyy)) *
                                inv_rho;
                rhs.dv[k] = -(s.u[k] * vx + s.v[k] * vy) +
                            (-py - qx + (c.mu + c.zeta) * vyy - (c.tau - c.mu) * vxx +
                             (c.tau + c.zeta) * uxy + c.alpha * (uxx + uyy)) *
                                inv_rho;
            }
        }
    });
    return rhs;
}

/// Continuity in advective form: rho_t = -(u rho_x + v rho_y) - rho (u_x + v_y).
inline std::vector<double> continuity_rhs(const SimState& s) {
    const int nx = s.grid.nx, ny = s.grid.ny;
    const double rdx = 1.0 / (2.0 * s.grid.dx()), rdy = 1.0 / (2.0 * s.grid.dy());
    std::vector<double> rhs(s.grid.cells());
    parallel_for_chunks(ny, [&](int j0, int j1) {
        for (int j = j0; j < j1; ++j) {
            const int jp = (j + 1) % ny, jm = (j + ny - 1) % ny;
            for (int i = 0; i < nx; ++i) {
                const int ip = (i + 1) % nx, im = (i + nx - 1) % nx;
                const int k = s.idx(i, j);
                const double rx = (s.rho[s.idx(ip, j)] - s.rho[s.idx(im, j)]) * rdx;
                const double ry = (s.rho[s.idx(i, jp)] - s.rho[s.idx(i, jm)]) * rdy;
                const double ux = (s.u[s.idx(ip, j)] - s.u[s.idx(im, j)]) * rdx;
                const double vy = (s.v[s.idx(i, jp)] - s.v[s.idx(i, jm)]) * rdy;
                rhs[k] = -(s.u[k] * rx + s.v[k] * ry) - s.rho[k] * (ux + vy);
            }
        }
    });
    return rhs;
}

/// Temperature equation:
///   T_t = -(u T_x + v T_y) + [<sigma, Delta> + div(kappa grad T)] / (c_p rho),
/// with the full contraction <sigma, Delta> = sum_ij sigma_ij Delta_ji over
/// the velocity-gradient matrix Delta = [[u_x, u_y], [v_x, v_y]].
inline std::vector<double> temperature_rhs(const SimState& s, const SimCoefficients& c) {
    if (!(c.c_p > 0.0)) throw ConfigError("temperature_rhs: c_p must be positive");
    const int nx = s.grid.nx, ny = s.grid.ny;
    const double dx = s.grid.dx(), dy = s.grid.dy();
    const double rdx = 1.0 / (2.0 * dx), rdy = 1.0 / (2.0 * dy);
    const double rdx2 = 1.0 / (dx * dx), rdy2 = 1.0 / (dy * dy);
    const StressFields sf = stress_field(s, c);
    std::vector<double> rhs(s.grid.cells());
    parallel_for_chunks(ny, [&](int j0, int j1) {
        for (int j = j0; j < j1; ++j) {
            const int jp = (j + 1) % ny, jm = (j + ny - 1) % ny;
            for (int i = 0; i < nx; ++i) {
                const int ip = (i + 1) % nx, im = (i + nx - 1) % nx;
                const int k = s.idx(i, j);
                const int kip = s.idx(ip, j), kim = s.idx(im, j);
                const int kjp = s.idx(i, jp), kjm = s.idx(i, jm);
                const double ux = (s.u[kip] - s.u[kim]) * rdx;
                const double uy = (s.u[kjp] - s.u[kjm]) * rdy;
                const double vx = (s.v[kip] - s.v[kim]) * rdx;
                const double vy = (s.v[kjp] - s.v[kjm]) * rdy;
                const double Tx = (s.T[kip] - s.T[kim]) * rdx;
                const double Ty = (s.T[kjp] - s.T[kjm]) * rdy;
                const double lapT = (s.T[kip] - 2.0 * s.T[k] + s.T[kim]) * rdx2 +
                                    (s.T[kjp] - 2.0 * s.T[k] + s.T[kjm]) * rdy2;
                const double heating = (sf.sxx[k] * ux + sf.syy[k] * vy) +
                                       (sf.sxy[k] * vx + sf.syx[k] * uy);
                rhs[k] = -(s.u[k] * Tx + s.v[k] * Ty) +
                         (heating + c.kappa_th * lapT) / (c.c_p * s.rho[k]);
            }
        }
    });
    return rhs;
}

struct SimDeriv {
    std::vector<double> du, dv, drho, dT;
};

inline SimDeriv rhs_all(const SimState& s, const SimCoefficients& c) {
    detail::check_state(s, "rhs");
    SimDeriv d;
    MomentumRhs m = momentum_rhs(s, c);
    d.du = std::move(m.du);
    d.dv = std::move(m.dv);
    d.drho = continuity_rhs(s);
    d.dT = temperature_rhs(s, c);
    return d;
}

/// Stability bound the stepper enforces:
///   dt <= cfl * min(h/|u|max, h^2 rho_min / (4 (mu+zeta+tau+|alpha|)),
///                   h^2 c_p rho_min / (4 kappa_th)).
inline double cfl_max_dt(const SimState& s, const SimCoefficients& c, double cfl = 0.4) {
    const double h = std::min(s.grid.dx(), s.grid.dy());
    double umax = 0.0, rho_min = s.rho[0];
    for (int k = 0; k < s.grid.cells(); ++k) {
        umax = std::max({umax, std::abs(s.u[k]), std::abs(s.v[k])});
        rho_min = std::min(rho_min, s.rho[k]);
    }
    double bound = h * h * rho_min / (4.0 * (c.mu + c.zeta + c.tau + std::abs(c.alpha)));
    if (umax > 0.0) bound = std::min(bound, h / umax);
    if (c.kappa_th > 0.0) bound = std::min(bound, h * h * c.c_p * rho_min / (4.0 * c.kappa_th));
    return cfl * bound;
}

/// Automatic step: the bound above tightened by the acoustic speed
/// c = sqrt(max dp/drho), which the explicit scheme also has to resolve.
inline double auto_dt(const SimState& s, const SimCoefficients& c, double cfl = 0.4) {
    const double h = std::min(s.grid.dx(), s.grid.dy());
    double umax = 0.0, c2max = 0.0;
    for (int k = 0; k < s.grid.cells(); ++k) {
        umax = std::max({umax, std::abs(s.u[k]), std::abs(s.v[k])});
        c2max = std::max(c2max, c.p.d_rho(s.rho[k], s.T[k]));
    }
    const double speed = umax + std::sqrt(std::max(0.0, c2max));
    double dt = cfl_max_dt(s, c, cfl);
    if (speed > 0.0) dt = std::min(dt, cfl * h / speed);
    return dt;
}

/// One classical RK4 step. Refuses steps above the stability bound and
/// aborts on non-finite fields or non-positive density.
inline SimState step(const SimState& s, const SimCoefficients& c, double dt, double cfl = 0.4) {
    if (!(dt > 0.0)) throw CflError("step: dt must be positive");
    detail::check_state(s, "step input");
    const double limit = cfl_max_dt(s, c, cfl);
    if (dt > limit)
        throw CflError("step: dt " + std::to_string(dt) + " exceeds stability bound " +
                       std::to_string(limit));
    const int n = s.grid.cells();

    auto shifted = [&](const SimState& base, const SimDeriv& d, double w) {
        SimState out = base;
        for (int k = 0; k < n; ++k) {
            out.u[k] = s.u[k] + w * d.du[k];
            out.v[k] = s.v[k] + w * d.dv[k];
            out.rho[k] = s.rho[k] + w * d.drho[k];
            out.T[k] = s.T[k] + w * d.dT[k];
        }
        out.t = s.t + w;
        return out;
    };

    const SimDeriv k1 = rhs_all(s, c);
    const SimDeriv k2 = rhs_all(shifted(s, k1, 0.5 * dt), c);
    const SimDeriv k3 = rhs_all(shifted(s, k2, 0.5 * dt), c);
    const SimDeriv k4 = rhs_all(shifted(s, k3, dt), c);

    SimState out = s;
    const double w = dt / 6.0;
    for (int k = 0; k < n; ++k) {
        out.u[k] = s.u[k] + w * (k1.du[k] + 2.0 * k2.du[k] + 2.0 * k3.du[k] + k4.du[k]);
        out.v[k] = s.v[k] + w * (k1.dv[k] + 2.0 * k2.dv[k] + 2.0 * k3.dv[k] + k4.dv[k]);
        out.rho[k] =
            s.rho[k] + w * (k1.drho[k] + 2.0 * k2.drho[k] + 2.0 * k3.drho[k] + k4.drho[k]);
        out.T[k] = s.T[k] + w * (k1.dT[k] + 2.0 * k2.dT[k] + 2.0 * k3.dT[k] + k4.dT[k]);
    }
    out.t = s.t + dt;
    detail::check_state(out, "step output");
    return out;
}

struct Diagnostics {
    double time = 0.0;
    double mass = 0.0;
    double kinetic_energy = 0.0;
    double T_min = 0.0;
    double T_max = 0.0;
};

/// Serial fixed-order reductions so results never depend on thread count.
inline Diagnostics diagnostics(const SimState& s) {
    Diagnostics d;
    d.time = s.t;
    const double cell = s.grid.dx() * s.grid.dy();
    d.T_min = s.T[0];
    d.T_max = s.T[0];
    for (int k = 0; k < s.grid.cells(); ++k) {
        d.mass += s.rho[k] * cell;
        d.kinetic_energy += 0.5 * s.rho[k] * (s.u[k] * s.u[k] + s.v[k] * s.v[k]) * cell;
        d.T_min = std::min(d.T_min, s.T[k]);
        d.T_max = std::max(d.T_max, s.T[k]);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Initial conditions
// ---------------------------------------------------------------------------

inline SimState init_uniform(const Grid& g, double u0, double v0, double rho0, double T0) {
    SimState s = SimState::zeros(g);
    for (int k = 0; k < g.cells(); ++k) {
        s.u[k] = u0;
        s.v[k] = v0;
        s.rho[k] = rho0;
        s.T[k] = T0;
    }
    return s;
}

/// Taylor-Green vortex u = U sin(kx x) cos(ky y), v = -U cos(kx x) sin(ky y)
/// (divergence free for Lx = Ly). The density carries the balancing
/// low-Mach pressure field delta p = -(rho0 U^2/4)(cos 2kx x + cos 2ky y)
/// through delta rho = delta p / (dp/drho) to suppress the acoustic
/// transient; pass compressible_balance = false for a uniform density.
inline SimState init_taylor_green(const Grid& g, double U, double rho0, double T0,
                                  const SimCoefficients& c, bool compressible_balance = true) {
    SimState s = SimState::zeros(g);
    const double kx = 2.0 * M_PI / g.Lx, ky = 2.0 * M_PI / g.Ly;
    const double c2 = std::max(c.p.d_rho(rho0, T0), 0.0);
    for (int j = 0; j < g.ny; ++j) {
        const double y = j * g.dy();
        for (int i = 0; i < g.nx; ++i) {
            const double x = i * g.dx();
            const int k = s.idx(i, j);
            s.u[k] = U * std::sin(kx * x) * std::cos(ky * y);
            s.v[k] = -U * std::cos(kx * x) * std::sin(ky * y);
            s.T[k] = T0;
            double drho = 0.0;
            if (compressible_balance && c2 > 0.0)
                drho = -(rho0 * U * U / 4.0) *
                       (std::cos(2.0 * kx * x) + std::cos(2.0 * ky * y)) / c2;
            s.rho[k] = rho0 + drho;
        }
    }
    return s;
}

/// Smooth density/velocity perturbation used for conservation tests.
inline SimState init_density_wave(const Grid& g, double rho0, double T0, double amp_rho,
                                  double amp_u) {
    SimState s = SimState::zeros(g);
    const double kx = 2.0 * M_PI / g.Lx, ky = 2.0 * M_PI / g.Ly;
    for (int j = 0; j < g.ny; ++j) {
        const double y = j * g.dy();
        for (int i = 0; i < g.nx; ++i) {
            const double x = i * g.dx();
            const int k = s.idx(i, j);
            s.rho[k] = rho0 * (1.0 + amp_rho * std::sin(kx * x) * std::cos(ky * y));
            s.u[k] = amp_u * std::sin(ky * y);
            s.v[k] = amp_u * std::sin(kx * x + 0.5);
            s.T[k] = T0;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Run loop with snapshot and manifest output
// ---------------------------------------------------------------------------

struct SimRunConfig {
    double dt = 0.0;  ///< 0 selects the automatic step
    double t_end = 1.0;
    double snapshot_every = 0.0;  ///< 0: only first and last snapshot
    double cfl = 0.4;
};

struct RunResult {
    std::vector<double> snapshot_times;
    std::vector<std::string> snapshot_files;
    std::vector<Diagnostics> series;
    int steps = 0;
    double dt = 0.0;
};

inline void write_snapshot_csv(const std::string& path, const SimState& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open snapshot file: " + path);
    os << "x,y,u,v,rho,T\n";
    for (int j = 0; j < s.grid.ny; ++j) {
        const double y = j * s.grid.dy();
        for (int i = 0; i < s.grid.nx; ++i) {
            const double x = i * s.grid.dx();
            const int k = s.idx(i, j);
            os << format_double(x) << ',' << format_double(y) << ',' << format_double(s.u[k])
               << ',' << format_double(s.v[k]) << ',' << format_double(s.rho[k]) << ','
               << format_double(s.T[k]) << '\n';
        }
    }
}

inline RunResult run(const SimState& initial, const SimCoefficients& coeffs,
                     const SimRunConfig& cfg, const std::string& output_dir,
                     const std::string& prefix = "snap") {
    initial.grid.validate();
    if (!(cfg.t_end > 0.0)) throw ConfigError("run: t_end must be positive");
    detail::check_state(initial, "run initial state");
    std::filesystem::create_directories(output_dir);

    const double dt = cfg.dt > 0.0 ? cfg.dt : auto_dt(initial, coeffs, cfg.cfl);
    if (!(dt > 0.0)) throw CflError("run: automatic step selection failed");
    {
        // refuse before stepping rather than in the middle of a run
        const double limit = cfl_max_dt(initial, coeffs, cfg.cfl);
        if (dt > limit)
            throw CflError("run: dt " + std::to_string(dt) + " exceeds stability bound " +
                           std::to_string(limit));
    }

    RunResult result;
    result.dt = dt;
    SimState state = initial;

    auto emit = [&](const SimState& s) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%06zu.csv", prefix.c_str(),
                      result.snapshot_times.size());
        const std::string file = name;
        write_snapshot_csv(output_dir + "/" + file, s);
        result.snapshot_times.push_back(s.t);
        result.snapshot_files.push_back(file);
        result.series.push_back(diagnostics(s));
    };

    emit(state);
    double next_snap = cfg.snapshot_every > 0.0 ? cfg.snapshot_every : cfg.t_end;
    const double t_eps = 1e-12 * std::max(1.0, cfg.t_end);
    while (state.t < cfg.t_end - t_eps) {
        const double step_dt = std::min(dt, cfg.t_end - state.t);
        state = step(state, coeffs, step_dt, cfg.cfl);
        ++result.steps;
        if (state.t >= next_snap - t_eps && state.t < cfg.t_end - t_eps) {
            emit(state);
            while (next_snap <= state.t + t_eps) next_snap += cfg.snapshot_every;
        }
    }
    emit(state);

    nlohmann::json manifest;
    manifest["dt"] = dt;
    manifest["t_end"] = cfg.t_end;
    manifest["steps"] = result.steps;
    manifest["grid"] = {{"nx", initial.grid.nx},
                        {"ny", initial.grid.ny},
                        {"Lx", initial.grid.Lx},
                        {"Ly", initial.grid.Ly}};
    nlohmann::json snaps = nlohmann::json::array();
    for (size_t k = 0; k < result.snapshot_times.size(); ++k)
        snaps.push_back({{"time", result.snapshot_times[k]}, {"file", result.snapshot_files[k]}});
    manifest["snapshots"] = snaps;
    nlohmann::json diag;
    for (const auto& d : result.series) {
        diag["time"].push_back(d.time);
        diag["mass"].push_back(d.mass);
        diag["kinetic_energy"].push_back(d.kinetic_energy);
        diag["T_min"].push_back(d.T_min);
        diag["T_max"].push_back(d.T_max);
    }
    manifest["diagnostics"] = diag;
    std::ofstream os(output_dir + "/manifest.json", std::ios::binary);
    if (!os) throw std::runtime_error("cannot open manifest file");
    os << manifest.dump(2) << '\n';
    return result;
}

}  // namespace viscotherm
