#pragma once

#include <optional>
#include <stdexcept>
#include <utility>

#include "viscotherm/coefficients.hpp"
#include "viscotherm/tensor.hpp"

namespace viscotherm {

/// Which quadratic free-energy model is in force.
///  - BulkN: isotropic medium in dimension 2 or 3,
///      h = 1/2[(mu+tau) d2 + (mu-tau) d3 + (zeta - 2mu/n) d1^2] - p d1 + h0.
///  - Surface2D: oriented 2D medium with complex structure J,
///      h = 1/2[mu t3 + tau t2^2 + alpha t1 t2 + (zeta-mu) t1^2] - p t1 - q t2 + h0.
enum class ModelKind { BulkN, Surface2D };

struct Model {
    ModelKind kind;
    Metric g;
    std::optional<ComplexStructure> J;

    static Model bulk(Metric metric) { return Model{ModelKind::BulkN, std::move(metric), {}}; }
    static Model bulk_flat(int n) { return bulk(Metric::euclidean(n)); }
    static Model surface(Metric metric, ComplexStructure cs) {
        if (metric.dim() != 2)
            throw std::invalid_argument("surface model: metric must be 2D");
        return Model{ModelKind::Surface2D, std::move(metric), std::move(cs)};
    }
    static Model surface_flat() {
        return surface(Metric::euclidean(2), ComplexStructure::standard());
    }

    int dim() const { return g.dim(); }
};

/// A point of the reduced thermodynamic phase space.
struct ThermoState {
    double rho = 1.0;
    double T = 1.0;
    Mat delta;  ///< deformation, n x n

    static ThermoState rest(double rho, double T, int n) {
        return ThermoState{rho, T, Mat::Zero(n, n)};
    }
};

namespace detail {

inline void validate(const ThermoState& s, const Model& m) {
    if (!(s.rho > 0.0) || !(s.T > 0.0))
        throw std::domain_error("thermo state: rho and T must be positive");
    require_square_small(s.delta, "deformation");
    if (s.delta.rows() != m.dim())
        throw std::invalid_argument("thermo state: deformation/metric dimension mismatch");
    if (m.kind == ModelKind::Surface2D && !m.J)
        throw std::invalid_argument("surface model: complex structure required");
}

/// Value and (rho,T)-derivatives of one coefficient at a point.
struct CoefDerivs {
    double v = 0.0, dr = 0.0, dt = 0.0, drr = 0.0, drt = 0.0, dtt = 0.0;
};

inline CoefDerivs eval(const ScalarField& f, double rho, double T) {
    return CoefDerivs{f.value(rho, T), f.d_rho(rho, T),     f.d_T(rho, T),
                      f.d_rho_rho(rho, T), f.d_rho_T(rho, T), f.d_T_T(rho, T)};
}

inline CoefDerivs operator+(CoefDerivs a, const CoefDerivs& b) {
    a.v += b.v; a.dr += b.dr; a.dt += b.dt; a.drr += b.drr; a.drt += b.drt; a.dtt += b.dtt;
    return a;
}
inline CoefDerivs operator-(CoefDerivs a, const CoefDerivs& b) {
    a.v -= b.v; a.dr -= b.dr; a.dt -= b.dt; a.drr -= b.drr; a.drt -= b.drt; a.dtt -= b.dtt;
    return a;
}
inline CoefDerivs operator*(double c, CoefDerivs a) {
    a.v *= c; a.dr *= c; a.dt *= c; a.drr *= c; a.drt *= c; a.dtt *= c;
    return a;
}

/// One invariant monomial of the deformation: value, componentwise gradient
/// (flattened i*n+j) and Hessian over the deformation entries.
struct Monomial {
    double value = 0.0;
    Vec grad;
    Mat hess;
};

inline int flat(int i, int j, int n) { return i * n + j; }

inline Monomial monomial_zero(int n) {
    return Monomial{0.0, Vec::Zero(n * n), Mat::Zero(n * n, n * n)};
}

/// tr D^2
inline Monomial mono_d2(const Mat& d) {
    const int n = static_cast<int>(d.rows());
    Monomial m = monomial_zero(n);
    m.value = (d * d).trace();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.grad[flat(i, j, n)] = 2.0 * d(j, i);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.hess(flat(i, j, n), flat(j, i, n)) = 2.0;
    return m;
}

/// tr D D'
inline Monomial mono_d3(const Mat& d, const Metric& g) {
    const int n = static_cast<int>(d.rows());
    Monomial m = monomial_zero(n);
    m.value = (d * adjoint(d, g)).trace();
    const Mat grad_mat = 2.0 * g.components() * d * g.inverse();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.grad[flat(i, j, n)] = grad_mat(i, j);
    const Mat& gm = g.components();
    const Mat& gi = g.inverse();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    m.hess(flat(i, j, n), flat(k, l, n)) = 2.0 * gm(i, k) * gi(j, l);
    return m;
}

/// (tr D)^2
inline Monomial mono_d1sq(const Mat& d) {
    const int n = static_cast<int>(d.rows());
    Monomial m = monomial_zero(n);
    const double d1 = d.trace();
    m.value = d1 * d1;
    for (int i = 0; i < n; ++i) m.grad[flat(i, i, n)] = 2.0 * d1;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) m.hess(flat(i, i, n), flat(k, k, n)) = 2.0;
    return m;
}

/// tr D
inline Monomial mono_d1(const Mat& d) {
    const int n = static_cast<int>(d.rows());
    Monomial m = monomial_zero(n);
    m.value = d.trace();
    for (int i = 0; i < n; ++i) m.grad[flat(i, i, n)] = 1.0;
    return m;
}

/// tr J D
inline Monomial mono_t2(const Mat& d, const Mat& J) {
    const int n = 2;
    Monomial m = monomial_zero(n);
    m.value = (J * d).trace();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.grad[flat(i, j, n)] = J(j, i);
    return m;
}

/// (tr J D)^2
inline Monomial mono_t2sq(const Mat& d, const Mat& J) {
    const int n = 2;
    Monomial m = monomial_zero(n);
    const double t2 = (J * d).trace();
    m.value = t2 * t2;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.grad[flat(i, j, n)] = 2.0 * t2 * J(j, i);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    m.hess(flat(i, j, n), flat(k, l, n)) = 2.0 * J(j, i) * J(l, k);
    return m;
}

/// (tr D)(tr J D)
inline Monomial mono_t1t2(const Mat& d, const Mat& J) {
    const int n = 2;
    Monomial m = monomial_zero(n);
    const double t1 = d.trace();
    const double t2 = (J * d).trace();
    m.value = t1 * t2;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m.grad[flat(i, j, n)] = (i == j ? t2 : 0.0) + t1 * J(j, i);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    m.hess(flat(i, j, n), flat(k, l, n)) =
                        (i == j ? J(l, k) : 0.0) + (k == l ? J(j, i) : 0.0);
    return m;
}

inline Monomial mono_one(int n) {
    Monomial m = monomial_zero(n);
    m.value = 1.0;
    return m;
}

inline void accumulate(Monomial& acc, const Monomial& m) {
    acc.value += m.value;
    acc.grad += m.grad;
    acc.hess += m.hess;
}

}  // namespace detail

/// All free-energy partials consumed by the stress, the derived quantities
/// and the thermodynamic quadratic form: values and derivatives are exact in
/// the deformation (h is quadratic) and use the coefficient fields'
/// derivative mechanism in (rho, T).
struct FreeEnergyPartials {
    double h = 0.0;
    double h_rho = 0.0;
    double h_T = 0.0;
    double h_rho_rho = 0.0;
    double h_T_T = 0.0;
    Vec grad_delta;       ///< dh/dDelta_ij, flattened i*n+j
    Vec grad_delta_rho;   ///< d2h/dDelta_ij drho
    Mat hess_delta;       ///< d2h/dDelta_ij dDelta_kl
};

inline FreeEnergyPartials free_energy_partials(const ThermoState& s, const CoefficientModel& c,
                                               const Model& m) {
    using namespace detail;
    validate(s, m);
    const int n = m.dim();
    const double rho = s.rho, T = s.T;

    // (coefficient, monomial) terms of h
    std::vector<std::pair<CoefDerivs, Monomial>> terms;
    const CoefDerivs mu = eval(c.mu, rho, T);
    const CoefDerivs tau = eval(c.tau, rho, T);
    const CoefDerivs zeta = eval(c.zeta, rho, T);
    const CoefDerivs p = eval(c.p, rho, T);
    const CoefDerivs h0 = eval(c.h0, rho, T);
    if (m.kind == ModelKind::BulkN) {
        terms.emplace_back(0.5 * (mu + tau), mono_d2(s.delta));
        terms.emplace_back(0.5 * (mu - tau), mono_d3(s.delta, m.g));
        terms.emplace_back(0.5 * (zeta - (2.0 / n) * mu), mono_d1sq(s.delta));
        terms.emplace_back(-1.0 * p, mono_d1(s.delta));
        terms.emplace_back(h0, mono_one(n));
    } else {
        const Mat& J = m.J->components();
        const CoefDerivs alpha = eval(c.alpha, rho, T);
        const CoefDerivs q = eval(c.q, rho, T);
        Monomial t3 = mono_d2(s.delta);
        accumulate(t3, mono_d3(s.delta, m.g));
        terms.emplace_back(0.5 * mu, t3);
        terms.emplace_back(0.5 * tau, mono_t2sq(s.delta, J));
        terms.emplace_back(0.5 * alpha, mono_t1t2(s.delta, J));
        terms.emplace_back(0.5 * (zeta - mu), mono_d1sq(s.delta));
        terms.emplace_back(-1.0 * p, mono_d1(s.delta));
        terms.emplace_back(-1.0 * q, mono_t2(s.delta, J));
        terms.emplace_back(h0, mono_one(n));
    }

    FreeEnergyPartials out;
    out.grad_delta = Vec::Zero(n * n);
    out.grad_delta_rho = Vec::Zero(n * n);
    out.hess_delta = Mat::Zero(n * n, n * n);
    for (const auto& [cd, mono] : terms) {
        out.h += cd.v * mono.value;
        out.h_rho += cd.dr * mono.value;
        out.h_T += cd.dt * mono.value;
        out.h_rho_rho += cd.drr * mono.value;
        out.h_T_T += cd.dtt * mono.value;
        out.grad_delta += cd.v * mono.grad;
        out.grad_delta_rho += cd.dr * mono.grad;
        out.hess_delta += cd.v * mono.hess;
    }
    return out;
}

inline double free_energy(const ThermoState& s, const CoefficientModel& c, const Model& m) {
    using namespace detail;
    validate(s, m);
    const int n = m.dim();
    const double rho = s.rho, T = s.T;
    const double mu = c.mu(rho, T), tau = c.tau(rho, T), zeta = c.zeta(rho, T);
    const double p = c.p(rho, T), h0 = c.h0(rho, T);
    if (m.kind == ModelKind::BulkN) {
        const TraceInvariants d = general_invariants(s.delta, m.g);
        return 0.5 * ((mu + tau) * d.d2 + (mu - tau) * d.d3 +
                      (zeta - 2.0 * mu / n) * d.d1 * d.d1) -
               p * d.d1 + h0;
    }
    const KahlerInvariants t = kahler_invariants(s.delta, m.g, *m.J);
    const double alpha = c.alpha(rho, T), q = c.q(rho, T);
    return 0.5 * (mu * t.t3 + tau * t.t2 * t.t2 + alpha * t.t1 * t.t2 +
                  (zeta - mu) * t.t1 * t.t1) -
           (p * t.t1 + q * t.t2) + h0;
}

/// Stress from the closed-form linear expression. Components are the
/// componentwise free-energy gradient, sigma_ij = dh/dDelta_ij; for the
/// Euclidean metric this is the usual stress matrix layout. At Delta = 0 the
/// bulk stress is -p I and the surface stress is -p I + q J.
inline Mat stress_closed_form(const ThermoState& s, const CoefficientModel& c, const Model& m) {
    detail::validate(s, m);
    const int n = m.dim();
    const double rho = s.rho, T = s.T;
    const double mu = c.mu(rho, T), tau = c.tau(rho, T), zeta = c.zeta(rho, T);
    const double p = c.p(rho, T);
    const Mat id = Mat::Identity(n, n);
    const Mat adjT = m.g.components() * s.delta * m.g.inverse();  // (D')^T
    if (m.kind == ModelKind::BulkN) {
        const double d1 = s.delta.trace();
        return (mu + tau) * s.delta.transpose() + (mu - tau) * adjT +
               ((zeta - 2.0 * mu / n) * d1 - p) * id;
    }
    const Mat& J = m.J->components();
    const double alpha = c.alpha(rho, T), q = c.q(rho, T);
    const double t1 = s.delta.trace();
    const double t2 = (J * s.delta).trace();
    return mu * (s.delta.transpose() + adjT) + tau * t2 * J.transpose() +
           0.5 * alpha * (t2 * id + t1 * J.transpose()) + ((zeta - mu) * t1 - p) * id -
           q * J.transpose();
}

/// Stress as a componentwise central finite difference of the free energy.
/// h is quadratic in the deformation, so this is exact up to roundoff; it is
/// the independent oracle for stress_closed_form.
inline Mat stress_autodiff(const ThermoState& s, const CoefficientModel& c, const Model& m,
                           double h_step = 1e-4) {
    detail::validate(s, m);
    const int n = m.dim();
    Mat sigma(n, n);
    ThermoState plus = s, minus = s;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double h = h_step * std::max(1.0, std::abs(s.delta(i, j)));
            plus.delta = s.delta;
            minus.delta = s.delta;
            plus.delta(i, j) += h;
            minus.delta(i, j) -= h;
            sigma(i, j) = (free_energy(plus, c, m) - free_energy(minus, c, m)) / (2.0 * h);
        }
    }
    return sigma;
}

/// Quantities generated by h: entropy s = -h_T, chemical potential
/// eta = h_rho, energy e = h - T h_T, and the stress.
struct DerivedState {
    double h = 0.0;
    double s = 0.0;
    double e = 0.0;
    double eta = 0.0;
    Mat sigma;
};

inline DerivedState derived_quantities(const ThermoState& st, const CoefficientModel& c,
                                       const Model& m) {
    const FreeEnergyPartials fp = free_energy_partials(st, c, m);
    DerivedState out;
    out.h = fp.h;
    out.s = -fp.h_T;
    out.e = fp.h - st.T * fp.h_T;
    out.eta = fp.h_rho;
    out.sigma = stress_closed_form(st, c, m);
    return out;
}

/// Residual of the contact identity de - T ds - sum_ij sigma_ij dDelta_ij
/// - eta drho, probed by central differences of the derived quantities along
/// every coordinate direction of (T, rho, Delta). The state surface is
/// Legendrian, so the residual is zero up to finite-difference error.
struct LegendrianReport {
    double residual = 0.0;  ///< max |residual| over directions
    double scale = 1.0;     ///< max magnitude of the compared terms
};

inline LegendrianReport legendrian_residual(const ThermoState& st, const CoefficientModel& c,
                                            const Model& m, double step = 1e-5) {
    detail::validate(st, m);
    const int n = m.dim();
    const DerivedState base = derived_quantities(st, c, m);
    LegendrianReport rep;

    auto probe = [&](const ThermoState& plus, const ThermoState& minus, double h,
                     double pairing) {
        const DerivedState dp = derived_quantities(plus, c, m);
        const DerivedState dm = derived_quantities(minus, c, m);
        const double de = (dp.e - dm.e) / (2.0 * h);
        const double ds = (dp.s - dm.s) / (2.0 * h);
        const double r = de - st.T * ds - pairing;
        rep.residual = std::max(rep.residual, std::abs(r));
        rep.scale = std::max({rep.scale, std::abs(de), std::abs(st.T * ds), std::abs(pairing)});
    };

    {  // T direction: de - T ds = 0 along dT
        const double h = step * std::max(1.0, st.T);
        ThermoState plus = st, minus = st;
        plus.T += h;
        minus.T -= h;
        probe(plus, minus, h, 0.0);
    }
    {  // rho direction: pairing is eta
        const double h = step * std::max(1.0, st.rho);
        ThermoState plus = st, minus = st;
        plus.rho += h;
        minus.rho -= h;
        probe(plus, minus, h, base.eta);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double h = step * std::max(1.0, std::abs(st.delta(i, j)));
            ThermoState plus = st, minus = st;
            plus.delta(i, j) += h;
            minus.delta(i, j) -= h;
            probe(plus, minus, h, base.sigma(i, j));
        }
    }
    return rep;
}

}  // namespace viscotherm
