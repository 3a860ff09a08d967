#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "viscotherm/kappa.hpp"

namespace viscotherm {

/// One point of a traced co-existence branch.
struct CurvePoint {
    int branch_id = 0;
    double rho = 0.0;
    double T = 0.0;
    double residual = 0.0;
};

/// Rectangle in the (rho, T) plane, strictly inside rho > 0, T > 0.
struct Window {
    double rho_min = 0.0, rho_max = 0.0;
    double T_min = 0.0, T_max = 0.0;

    void validate() const {
        if (!(rho_min > 0.0) || !(T_min > 0.0) || !(rho_max > rho_min) || !(T_max > T_min))
            throw std::invalid_argument("window: need 0 < rho_min < rho_max, 0 < T_min < T_max");
    }
    bool contains(double rho, double T) const {
        return rho >= rho_min && rho <= rho_max && T >= T_min && T <= T_max;
    }
};

struct TraceOptions {
    int seed_grid = 64;          ///< seeding grid cells per axis
    double tol = 1e-10;          ///< residual tolerance, relative to the determinant scale
    double bisect_width = 1e-12; ///< edge bisection stops at this fraction of the span
    int step_divisor = 512;      ///< continuation arc step = window diagonal / step_divisor
    int max_corrector_iters = 50;
    int max_points_per_branch = 100000;
};

struct TraceResult {
    std::vector<CurvePoint> points;  ///< ordered by (branch_id, arc position)
    int branches = 0;
    int dropped_points = 0;  ///< corrector failures
};

namespace detail {

/// Continuation runs in window-scaled coordinates (unit square) so the arc
/// step and normal directions are isotropic regardless of the window shape.
struct ScaledProblem {
    Window w;
    std::function<double(double, double)> f;       // residual(rho, T)
    std::function<double(double, double)> scale;   // tolerance scale(rho, T)

    double rho_of(double x) const { return w.rho_min + x * (w.rho_max - w.rho_min); }
    double T_of(double y) const { return w.T_min + y * (w.T_max - w.T_min); }
    double eval(double x, double y) const { return f(rho_of(x), T_of(y)); }
    double tol_at(double x, double y, double tol) const {
        return tol * scale(rho_of(x), T_of(y));
    }

    std::array<double, 2> grad(double x, double y) const {
        const double h = 1e-6;
        const double fx = (eval(std::min(x + h, 1.0), y) - eval(std::max(x - h, 0.0), y)) /
                          (std::min(x + h, 1.0) - std::max(x - h, 0.0));
        const double fy = (eval(x, std::min(y + h, 1.0)) - eval(x, std::max(y - h, 0.0))) /
                          (std::min(y + h, 1.0) - std::max(y - h, 0.0));
        return {fx, fy};
    }
};

struct Pt {
    double x = 0.0, y = 0.0;
};

inline bool corrector(const ScaledProblem& sp, Pt& p, double tol, int max_iters) {
    for (int it = 0; it < max_iters; ++it) {
        const double f = sp.eval(p.x, p.y);
        if (std::abs(f) <= sp.tol_at(p.x, p.y, tol)) {
            // polish toward machine-level residual while it keeps improving
            double best = std::abs(f);
            for (int polish = 0; polish < 8; ++polish) {
                const auto g = sp.grad(p.x, p.y);
                const double g2 = g[0] * g[0] + g[1] * g[1];
                if (g2 <= 0.0) break;
                const double fv = sp.eval(p.x, p.y);
                const Pt cand{p.x - fv * g[0] / g2, p.y - fv * g[1] / g2};
                if (cand.x < 0.0 || cand.x > 1.0 || cand.y < 0.0 || cand.y > 1.0) break;
                const double fc = sp.eval(cand.x, cand.y);
                if (std::abs(fc) >= best) break;
                best = std::abs(fc);
                p = cand;
            }
            return true;
        }
        const auto g = sp.grad(p.x, p.y);
        const double g2 = g[0] * g[0] + g[1] * g[1];
        if (g2 <= 0.0) return false;
        p.x -= f * g[0] / g2;
        p.y -= f * g[1] / g2;
        if (p.x < -0.05 || p.x > 1.05 || p.y < -0.05 || p.y > 1.05) return false;
    }
    return false;
}

/// Bisection along a parameterized segment with a sign change.
inline Pt bisect_segment(const ScaledProblem& sp, Pt a, Pt b, double width_stop) {
    double fa = sp.eval(a.x, a.y);
    for (int it = 0; it < 200; ++it) {
        const Pt mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
        const double fm = sp.eval(mid.x, mid.y);
        if (fm == 0.0) return mid;
        if ((fa < 0.0) != (fm < 0.0)) {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
        if (std::hypot(b.x - a.x, b.y - a.y) < width_stop) break;
    }
    return Pt{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

}  // namespace detail

/// Traces the zero locus of `residual` inside `window`: seeds from sign
/// changes on a coarse grid, refines seeds by bisection along grid edges,
/// then follows each branch with tangent-predictor / normal-corrector steps
/// (1D Newton along the gradient, bisection fallback). Deterministic: fixed
/// scan and step order, no randomness.
inline TraceResult trace_zero_locus(const std::function<double(double, double)>& residual,
                                    const std::function<double(double, double)>& scale,
                                    const Window& window, const TraceOptions& opt = {}) {
    window.validate();
    using detail::Pt;
    detail::ScaledProblem sp{window, residual, scale};

    const int G = std::max(4, opt.seed_grid);
    std::vector<double> fgrid((G + 1) * (G + 1));
    auto at = [&](int i, int j) -> double& { return fgrid[j * (G + 1) + i]; };
    for (int j = 0; j <= G; ++j)
        for (int i = 0; i <= G; ++i) at(i, j) = sp.eval(double(i) / G, double(j) / G);

    // Seeds from sign changes along horizontal then vertical edges, scan order fixed.
    std::vector<Pt> seeds;
    auto sign_change = [](double a, double b) { return a == 0.0 || (a < 0.0) != (b < 0.0); };
    for (int j = 0; j <= G; ++j)
        for (int i = 0; i < G; ++i)
            if (sign_change(at(i, j), at(i + 1, j)))
                seeds.push_back(detail::bisect_segment(sp, {double(i) / G, double(j) / G},
                                                       {double(i + 1) / G, double(j) / G},
                                                       opt.bisect_width));
    for (int i = 0; i <= G; ++i)
        for (int j = 0; j < G; ++j)
            if (sign_change(at(i, j), at(i, j + 1)))
                seeds.push_back(detail::bisect_segment(sp, {double(i) / G, double(j) / G},
                                                       {double(i) / G, double(j + 1) / G},
                                                       opt.bisect_width));

    TraceResult result;
    if (seeds.empty()) return result;

    const double step = std::sqrt(2.0) / opt.step_divisor;
    std::vector<Pt> traced;  // all accepted points, for seed de-duplication

    auto near_traced = [&](const Pt& p, double dist) {
        for (const auto& q : traced)
            if (std::hypot(p.x - q.x, p.y - q.y) < dist) return true;
        return false;
    };

    auto tangent_at = [&](const Pt& p) -> Pt {
        const auto g = sp.grad(p.x, p.y);
        const double norm = std::hypot(g[0], g[1]);
        if (norm <= 0.0) return Pt{1.0, 0.0};
        return Pt{-g[1] / norm, g[0] / norm};
    };

    for (const auto& seed0 : seeds) {
        Pt seed = seed0;
        if (!detail::corrector(sp, seed, opt.tol, opt.max_corrector_iters)) {
            ++result.dropped_points;
            continue;
        }
        if (near_traced(seed, 1.5 * step)) continue;

        // march both directions from the seed
        std::array<std::vector<Pt>, 2> halves;
        for (int dir = 0; dir < 2; ++dir) {
            Pt cur = seed;
            Pt tan = tangent_at(seed);
            if (dir == 1) {
                tan.x = -tan.x;
                tan.y = -tan.y;
            }
            for (int k = 0; k < opt.max_points_per_branch; ++k) {
                Pt pred{cur.x + step * tan.x, cur.y + step * tan.y};
                if (pred.x < 0.0 || pred.x > 1.0 || pred.y < 0.0 || pred.y > 1.0) break;
                Pt nxt = pred;
                if (!detail::corrector(sp, nxt, opt.tol, opt.max_corrector_iters)) {
                    // fallback: bisection along the normal through the predictor
                    const auto g = sp.grad(pred.x, pred.y);
                    const double gn = std::hypot(g[0], g[1]);
                    bool rescued = false;
                    if (gn > 0.0) {
                        const Pt a{pred.x - step * g[0] / gn, pred.y - step * g[1] / gn};
                        const Pt b{pred.x + step * g[0] / gn, pred.y + step * g[1] / gn};
                        if (a.x >= 0.0 && a.x <= 1.0 && a.y >= 0.0 && a.y <= 1.0 && b.x >= 0.0 &&
                            b.x <= 1.0 && b.y >= 0.0 && b.y <= 1.0 &&
                            (sp.eval(a.x, a.y) < 0.0) != (sp.eval(b.x, b.y) < 0.0)) {
                            nxt = detail::bisect_segment(sp, a, b, opt.bisect_width);
                            rescued = std::abs(sp.eval(nxt.x, nxt.y)) <=
                                      sp.tol_at(nxt.x, nxt.y, opt.tol);
                        }
                    }
                    if (!rescued) {
                        ++result.dropped_points;
                        break;
                    }
                }
                if (nxt.x < 0.0 || nxt.x > 1.0 || nxt.y < 0.0 || nxt.y > 1.0) break;
                // closed-loop detection against the branch start
                if (k > 10 && std::hypot(nxt.x - seed.x, nxt.y - seed.y) < 0.75 * step) break;
                Pt new_tan = tangent_at(nxt);
                if (new_tan.x * tan.x + new_tan.y * tan.y < 0.0) {
                    new_tan.x = -new_tan.x;
                    new_tan.y = -new_tan.y;
                }
                // guard against corrector jumps onto a different branch
                if (std::hypot(nxt.x - cur.x, nxt.y - cur.y) > 3.0 * step) break;
                halves[dir].push_back(nxt);
                cur = nxt;
                tan = new_tan;
            }
        }

        std::vector<Pt> branch;
        branch.reserve(halves[1].size() + 1 + halves[0].size());
        for (auto it = halves[1].rbegin(); it != halves[1].rend(); ++it) branch.push_back(*it);
        branch.push_back(seed);
        for (const auto& p : halves[0]) branch.push_back(p);

        const int id = result.branches++;
        for (const auto& p : branch) {
            traced.push_back(p);
            result.points.push_back(CurvePoint{id, sp.rho_of(p.x), sp.T_of(p.y),
                                               sp.eval(p.x, p.y)});
        }
    }
    return result;
}

/// Co-existence manifold slice at fixed deformation: traces the zero locus
/// of det(T kappa) over the (rho, T) window.
inline TraceResult trace_coexistence_curve(const CoefficientModel& c, const Model& m,
                                           const Mat& delta, const Window& window,
                                           const TraceOptions& opt = {}) {
    auto residual = [&](double rho, double T) {
        return degeneracy_residual(ThermoState{rho, T, delta}, c, m);
    };
    auto scale = [&](double rho, double T) {
        const ThermoState s{rho, T, delta};
        return degeneracy_scale(assemble_kappa(s, c, m), T);
    };
    return trace_zero_locus(residual, scale, window, opt);
}

/// CSV emission, headers exactly: branch_id,rho,T,residual.
inline void write_curve_csv(std::ostream& os, const TraceResult& r) {
    os << "branch_id,rho,T,residual\n";
    for (const auto& p : r.points)
        os << p.branch_id << ',' << format_double(p.rho) << ',' << format_double(p.T) << ','
           << format_double(p.residual) << '\n';
}

inline void write_curve_csv(const std::string& path, const TraceResult& r) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    write_curve_csv(os, r);
}

}  // namespace viscotherm
