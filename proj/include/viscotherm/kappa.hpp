#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "viscotherm/thermo.hpp"

namespace viscotherm {

/// The pseudo-Riemannian quadratic form of the state model over the
/// coordinates (T, rho, Delta_11, Delta_12, ..., Delta_nn):
///   kappa = (1/T) (h_TT dT^2 - h_rhorho drho^2
///                  - sum h_{D_ij D_kl} dD_ij dD_kl - 2 sum h_{D_ij rho} dD_ij drho).
/// Its degeneracy locus is the co-existence manifold. The dT row carries no
/// cross terms by construction.
struct KappaForm {
    int n = 2;
    Mat matrix;  ///< symmetric (2+n^2) x (2+n^2), 1/T factor included

    int size() const { return 2 + n * n; }
};

inline KappaForm assemble_kappa(const ThermoState& s, const CoefficientModel& c, const Model& m) {
    if (!(s.T > 0.0)) throw std::domain_error("assemble_kappa: T must be positive");
    const FreeEnergyPartials fp = free_energy_partials(s, c, m);
    const int n = m.dim();
    const int N = 2 + n * n;
    KappaForm k;
    k.n = n;
    k.matrix = Mat::Zero(N, N);
    const double invT = 1.0 / s.T;
    k.matrix(0, 0) = fp.h_T_T * invT;
    k.matrix(1, 1) = -fp.h_rho_rho * invT;
    for (int a = 0; a < n * n; ++a) {
        k.matrix(2 + a, 1) = -fp.grad_delta_rho[a] * invT;
        k.matrix(1, 2 + a) = k.matrix(2 + a, 1);
        for (int b = 0; b < n * n; ++b) k.matrix(2 + a, 2 + b) = -fp.hess_delta(a, b) * invT;
    }
    return k;
}

/// det(T * kappa): zero exactly where kappa degenerates (T > 0), with the
/// conformal 1/T factor removed so the residual stays smooth in T.
inline double degeneracy_residual(const ThermoState& s, const CoefficientModel& c,
                                  const Model& m) {
    const KappaForm k = assemble_kappa(s, c, m);
    return (s.T * k.matrix).determinant();
}

/// Determinant-scale used to normalize degeneracy tolerances:
/// (max |entry of T kappa|)^(2+n^2).
inline double degeneracy_scale(const KappaForm& k, double T) {
    const double e = std::max(1e-300, (T * k.matrix).cwiseAbs().maxCoeff());
    return std::pow(e, k.size());
}

/// Ratio of smallest to largest singular value of T * kappa (symmetric, so
/// singular values are absolute eigenvalues).
inline double kappa_conditioning(const KappaForm& k, double T) {
    Eigen::SelfAdjointEigenSolver<Mat> es(T * k.matrix);
    const Vec ev = es.eigenvalues().cwiseAbs();
    return ev.minCoeff() / std::max(ev.maxCoeff(), 1e-300);
}

namespace detail {
inline double log_deriv_combo(const ScalarField& f, double rho, double T, const char* name) {
    // f^2 * d/drho((1/f) d/drho ln f) = f_rr - 2 f_r^2 / f
    const double v = f.value(rho, T);
    if (std::abs(v) < 1e-14)
        throw SingularCoefficientError(std::string("coefficient ") + name +
                                       " vanishes inside a logarithmic derivative");
    const double fr = f.d_rho(rho, T);
    return f.d_rho_rho(rho, T) - 2.0 * fr * fr / v;
}
}  // namespace detail

/// Closed-form co-existence condition for the bulk model, evaluated exactly
/// as displayed:
///   h_TT * [ (d2+d3-(2/n)d1^2) mu^2 (1/mu d_rho ln mu)'
///          + (d2-d3) tau^2 (1/tau d_rho ln tau)'
///          + d1^2 zeta^2 (1/zeta d_rho ln zeta)'
///          - 2 d1 (p_rr + p_r d_rho ln zeta) + p_r^2 + 2 h0_rr ].
/// The determinant of the assembled form is the ground truth; this printed
/// expression is a cross-check whose zero set is compared against it.
inline double coexistence_condition_bulk(const ThermoState& s, const CoefficientModel& c,
                                         const Model& m) {
    if (m.kind != ModelKind::BulkN)
        throw std::invalid_argument("coexistence_condition_bulk: bulk model required");
    detail::validate(s, m);
    const int n = m.dim();
    const double rho = s.rho, T = s.T;
    const TraceInvariants d = general_invariants(s.delta, m.g);

    const double mu_term = detail::log_deriv_combo(c.mu, rho, T, "mu");
    const double tau_term = detail::log_deriv_combo(c.tau, rho, T, "tau");
    const double zeta_term = detail::log_deriv_combo(c.zeta, rho, T, "zeta");
    const double zeta_v = c.zeta(rho, T);
    const double p_r = c.p.d_rho(rho, T);
    const double p_rr = c.p.d_rho_rho(rho, T);
    const double h0_rr = c.h0.d_rho_rho(rho, T);

    const double bracket = (d.d2 + d.d3 - (2.0 / n) * d.d1 * d.d1) * mu_term +
                           (d.d2 - d.d3) * tau_term + d.d1 * d.d1 * zeta_term -
                           2.0 * d.d1 * (p_rr + p_r * c.zeta.d_rho(rho, T) / zeta_v) +
                           p_r * p_r + 2.0 * h0_rr;
    const FreeEnergyPartials fp = free_energy_partials(s, c, m);
    return fp.h_T_T * bracket;
}

/// Binding of the eta symbol in the surface co-existence condition. The
/// surface free energy carries (zeta - mu) on the squared-trace term, so
/// both readings are plausible; Zeta is the one whose zero set matches the
/// determinant of the assembled form (see select_eta_binding).
enum class EtaBinding { Zeta, ZetaMinusMu };

inline const char* to_string(EtaBinding b) {
    return b == EtaBinding::Zeta ? "zeta" : "zeta_minus_mu";
}

/// Closed-form co-existence condition for the surface model, evaluated as
/// displayed with eta bound per `binding`.
inline double coexistence_condition_surface(const ThermoState& s, const CoefficientModel& c,
                                            const Model& m, EtaBinding binding) {
    if (m.kind != ModelKind::Surface2D)
        throw std::invalid_argument("coexistence_condition_surface: surface model required");
    detail::validate(s, m);
    const double rho = s.rho, T = s.T;
    const KahlerInvariants t = kahler_invariants(s.delta, m.g, *m.J);
    const double t1 = t.t1, t2 = t.t2, t4 = t.t4;

    auto d0 = [&](const ScalarField& f) { return f.value(rho, T); };
    auto d1 = [&](const ScalarField& f) { return f.d_rho(rho, T); };
    auto d2 = [&](const ScalarField& f) { return f.d_rho_rho(rho, T); };

    const double mu = d0(c.mu), mu_r = d1(c.mu), mu_rr = d2(c.mu);
    const double tau = d0(c.tau), tau_r = d1(c.tau), tau_rr = d2(c.tau);
    const double al = d0(c.alpha), al_r = d1(c.alpha), al_rr = d2(c.alpha);
    const double p_r = d1(c.p), p_rr = d2(c.p);
    const double q_r = d1(c.q), q_rr = d2(c.q);
    const double h0_rr = d2(c.h0);

    double eta, eta_r, eta_rr;
    if (binding == EtaBinding::Zeta) {
        eta = d0(c.zeta);
        eta_r = d1(c.zeta);
        eta_rr = d2(c.zeta);
    } else {
        eta = d0(c.zeta) - mu;
        eta_r = d1(c.zeta) - mu_r;
        eta_rr = d2(c.zeta) - mu_rr;
    }

    const double cq = tau_r * t2 + 0.5 * al_r * t1 - q_r;
    const double cp = eta_r * t1 + 0.5 * al_r * t2 - p_r;

    const double group_alpha2 = (t1 * t1 - t4) * mu_rr - eta_rr * t1 * t1 - al_rr * t1 * t2 -
                                tau_rr * t2 * t2 + 2.0 * p_rr * t1 + 2.0 * q_rr * t2 -
                                2.0 * h0_rr;
    const double group_tau = 4.0 * (t4 - t1 * t1) * mu_rr + 4.0 * eta_rr * t1 * t1 +
                             4.0 * al_rr * t1 * t2 + 4.0 * tau_rr * t2 * t2 -
                             8.0 * p_rr * t1 - 8.0 * q_rr * t2 + 8.0 * h0_rr;

    const double expr = (group_alpha2 * al * al + 8.0 * cq * cp * al +
                         (group_tau * tau - 8.0 * cq * cq) * eta - 8.0 * tau * cp * cp) *
                            mu +
                        8.0 * (t1 * t1 - t4) * (tau * eta - 0.25 * al * al) * mu_r * mu_r;
    const FreeEnergyPartials fp = free_energy_partials(s, c, m);
    return fp.h_T_T * expr;
}

}  // namespace viscotherm
