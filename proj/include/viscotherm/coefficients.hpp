#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "viscotherm/common.hpp"

namespace viscotherm {

/// A scalar material function of (rho, T) with partial derivatives up to
/// second order. Derivatives are analytic closures when supplied, otherwise
/// central finite differences: step eps^(1/3)*max(1,|x|) for first order and
/// eps^(1/4)*max(1,|x|) for second order (the larger step keeps the
/// second-difference roundoff noise below truncation).
class ScalarField {
    struct raw_tag {};
    explicit ScalarField(raw_tag) {}

  public:
    using Fn = std::function<double(double, double)>;

    ScalarField() { *this = constant(0.0); }

    static ScalarField constant(double v) {
        ScalarField s{raw_tag{}};
        s.f_ = [v](double, double) { return v; };
        auto zero = [](double, double) { return 0.0; };
        s.d_rho_ = zero;
        s.d_T_ = zero;
        s.d_rho_rho_ = zero;
        s.d_rho_T_ = zero;
        s.d_T_T_ = zero;
        s.constant_ = true;
        s.constant_value_ = v;
        return s;
    }

    static ScalarField analytic(Fn f, Fn d_rho, Fn d_T, Fn d_rho_rho, Fn d_rho_T, Fn d_T_T) {
        ScalarField s{raw_tag{}};
        s.f_ = std::move(f);
        s.d_rho_ = std::move(d_rho);
        s.d_T_ = std::move(d_T);
        s.d_rho_rho_ = std::move(d_rho_rho);
        s.d_rho_T_ = std::move(d_rho_T);
        s.d_T_T_ = std::move(d_T_T);
        return s;
    }

    /// Value-only field; all derivatives come from finite differences.
    static ScalarField numeric(Fn f) {
        ScalarField s{raw_tag{}};
        s.f_ = std::move(f);
        return s;
    }

    double value(double rho, double T) const { return f_(rho, T); }
    double operator()(double rho, double T) const { return f_(rho, T); }

    double d_rho(double rho, double T) const {
        if (d_rho_) return d_rho_(rho, T);
        const double h = step1(rho);
        return (f_(rho + h, T) - f_(rho - h, T)) / (2.0 * h);
    }
    double d_T(double rho, double T) const {
        if (d_T_) return d_T_(rho, T);
        const double h = step1(T);
        return (f_(rho, T + h) - f_(rho, T - h)) / (2.0 * h);
    }
    double d_rho_rho(double rho, double T) const {
        if (d_rho_rho_) return d_rho_rho_(rho, T);
        const double h = step2(rho);
        return (f_(rho + h, T) - 2.0 * f_(rho, T) + f_(rho - h, T)) / (h * h);
    }
    double d_T_T(double rho, double T) const {
        if (d_T_T_) return d_T_T_(rho, T);
        const double h = step2(T);
        return (f_(rho, T + h) - 2.0 * f_(rho, T) + f_(rho, T - h)) / (h * h);
    }
    double d_rho_T(double rho, double T) const {
        if (d_rho_T_) return d_rho_T_(rho, T);
        const double hr = step2(rho);
        const double ht = step2(T);
        return (f_(rho + hr, T + ht) - f_(rho + hr, T - ht) - f_(rho - hr, T + ht) +
                f_(rho - hr, T - ht)) /
               (4.0 * hr * ht);
    }

    bool is_constant() const { return constant_; }
    double constant_value() const {
        if (!constant_) throw std::logic_error("ScalarField: not a constant");
        return constant_value_;
    }

  private:
    static double step1(double x) { return std::cbrt(kMachineEps) * std::max(1.0, std::abs(x)); }
    static double step2(double x) {
        return std::pow(kMachineEps, 0.25) * std::max(1.0, std::abs(x));
    }

    Fn f_;
    Fn d_rho_, d_T_, d_rho_rho_, d_rho_T_, d_T_T_;
    bool constant_ = false;
    double constant_value_ = 0.0;
};

/// Thermodynamic pressure generated by a still-medium free energy density:
/// p(rho, T) = rho * dh0/drho - h0. First derivatives are exact in terms of
/// h0's second derivatives; second derivatives of p would need third
/// derivatives of h0, so they differentiate the exact first-derivative
/// closures numerically.
inline ScalarField pressure_from_h0(const ScalarField& h0) {
    auto value = [h0](double rho, double T) { return rho * h0.d_rho(rho, T) - h0.value(rho, T); };
    auto d_rho = [h0](double rho, double T) { return rho * h0.d_rho_rho(rho, T); };
    auto d_T = [h0](double rho, double T) { return rho * h0.d_rho_T(rho, T) - h0.d_T(rho, T); };
    auto d_rho_rho = [h0](double rho, double T) {
        const double h = std::cbrt(kMachineEps) * std::max(1.0, std::abs(rho));
        auto p_rho = [&](double r) { return r * h0.d_rho_rho(r, T); };
        return (p_rho(rho + h) - p_rho(rho - h)) / (2.0 * h);
    };
    auto d_rho_T = [h0](double rho, double T) {
        const double h = std::cbrt(kMachineEps) * std::max(1.0, std::abs(T));
        auto p_rho = [&](double t) { return rho * h0.d_rho_rho(rho, t); };
        return (p_rho(T + h) - p_rho(T - h)) / (2.0 * h);
    };
    auto d_T_T = [h0](double rho, double T) {
        const double h = std::cbrt(kMachineEps) * std::max(1.0, std::abs(T));
        auto p_T = [&](double t) { return rho * h0.d_rho_T(rho, t) - h0.d_T(rho, t); };
        return (p_T(T + h) - p_T(T - h)) / (2.0 * h);
    };
    return ScalarField::analytic(value, d_rho, d_T, d_rho_rho, d_rho_T, d_T_T);
}

/// Material description of a medium: three viscosities, the surface-model
/// coefficients alpha and q, pressures, the still-medium free energy and the
/// transport constants, all as functions of (rho, T).
struct CoefficientModel {
    ScalarField mu;        ///< shear viscosity, must be > 0 where evaluated
    ScalarField tau;       ///< rotational viscosity
    ScalarField zeta;      ///< volume viscosity
    ScalarField alpha;     ///< surface-model cross coefficient
    ScalarField p;         ///< thermodynamic pressure
    ScalarField q;         ///< rotational pressure (surface model)
    ScalarField h0;        ///< still-medium free energy density
    ScalarField c_p;       ///< heat capacity, > 0
    ScalarField kappa_th;  ///< thermal conductivity, >= 0

    /// User-supplied still-medium energy; the pressure defaults to the
    /// thermodynamic one generated by it.
    static CoefficientModel from_h0(ScalarField h0, double mu, double tau, double zeta,
                                    double alpha = 0.0, double q = 0.0, double c_p = 1.0,
                                    double kappa_th = 0.0) {
        CoefficientModel m = constants(mu, tau, zeta, alpha, 0.0, q, 0.0, c_p, kappa_th);
        m.p = pressure_from_h0(h0);
        m.h0 = std::move(h0);
        return m;
    }

    /// Everything constant. p and h0 default to the given constants.
    static CoefficientModel constants(double mu, double tau, double zeta, double alpha = 0.0,
                                      double p = 0.0, double q = 0.0, double h0 = 0.0,
                                      double c_p = 1.0, double kappa_th = 0.0) {
        CoefficientModel m;
        m.mu = ScalarField::constant(mu);
        m.tau = ScalarField::constant(tau);
        m.zeta = ScalarField::constant(zeta);
        m.alpha = ScalarField::constant(alpha);
        m.p = ScalarField::constant(p);
        m.q = ScalarField::constant(q);
        m.h0 = ScalarField::constant(h0);
        m.c_p = ScalarField::constant(c_p);
        m.kappa_th = ScalarField::constant(kappa_th);
        return m;
    }

    /// Strictly convex quadratic still-medium energy
    /// h0 = A/2 (rho-rho0)^2 + B/2 (T-T0)^2 + C, with p derived from h0.
    static CoefficientModel quadratic(double A, double B, double rho0, double T0, double C,
                                      double mu, double tau, double zeta, double alpha = 0.0,
                                      double q = 0.0, double c_p = 1.0, double kappa_th = 0.0) {
        CoefficientModel m = constants(mu, tau, zeta, alpha, 0.0, q, 0.0, c_p, kappa_th);
        m.h0 = ScalarField::analytic(
            [=](double r, double t) {
                return 0.5 * A * (r - rho0) * (r - rho0) + 0.5 * B * (t - T0) * (t - T0) + C;
            },
            [=](double r, double) { return A * (r - rho0); },
            [=](double, double t) { return B * (t - T0); },
            [=](double, double) { return A; },
            [](double, double) { return 0.0; },
            [=](double, double) { return B; });
        m.p = ScalarField::analytic(
            [=](double r, double t) {
                return r * A * (r - rho0) -
                       (0.5 * A * (r - rho0) * (r - rho0) + 0.5 * B * (t - T0) * (t - T0) + C);
            },
            [=](double r, double) { return A * r; },
            [=](double, double t) { return -B * (t - T0); },
            [=](double, double) { return A; },
            [](double, double) { return 0.0; },
            [=](double, double) { return -B; });
        return m;
    }

    /// Ideal gas: h0 = R rho T (ln rho - 1) - c_v rho T (ln T - 1),
    /// which generates p = R rho T.
    static CoefficientModel ideal_gas(double R, double c_v, double mu, double tau, double zeta,
                                      double alpha = 0.0, double q = 0.0, double c_p = 1.0,
                                      double kappa_th = 0.0) {
        CoefficientModel m = constants(mu, tau, zeta, alpha, 0.0, q, 0.0, c_p, kappa_th);
        m.h0 = ScalarField::analytic(
            [=](double r, double t) {
                return R * r * t * (std::log(r) - 1.0) - c_v * r * t * (std::log(t) - 1.0);
            },
            [=](double r, double t) { return R * t * std::log(r) - c_v * t * (std::log(t) - 1.0); },
            [=](double r, double t) {
                return R * r * (std::log(r) - 1.0) - c_v * r * std::log(t);
            },
            [=](double r, double t) { return R * t / r; },
            [=](double r, double t) { return R * std::log(r) - c_v * std::log(t); },
            [=](double r, double t) { return -c_v * r / t; });
        m.p = ScalarField::analytic([=](double r, double t) { return R * r * t; },
                                    [=](double, double t) { return R * t; },
                                    [=](double r, double) { return R * r; },
                                    [](double, double) { return 0.0; },
                                    [=](double, double) { return R; },
                                    [](double, double) { return 0.0; });
        return m;
    }

    /// Van der Waals medium:
    /// h0 = -rho R T (ln((1 - b rho)/rho) + 1) - a rho^2 - c_v rho T (ln T - 1),
    /// generating the equation of state p = rho R T / (1 - b rho) - a rho^2.
    /// Reduced units a = 3, b = 1/3, R = 8/3 put the critical point at
    /// (rho, T) = (1, 1). Valid for rho < 1/b.
    static CoefficientModel van_der_waals(double R, double a, double b, double c_v, double mu,
                                          double tau, double zeta, double alpha = 0.0,
                                          double q = 0.0, double c_p = 1.0,
                                          double kappa_th = 0.0) {
        CoefficientModel m = constants(mu, tau, zeta, alpha, 0.0, q, 0.0, c_p, kappa_th);
        auto covol = [b](double r) {
            const double w = 1.0 - b * r;
            if (!(w > 0.0))
                throw std::domain_error("van der Waals model: rho must satisfy b*rho < 1");
            return w;
        };
        m.h0 = ScalarField::analytic(
            [=](double r, double t) {
                const double w = covol(r);
                return -r * R * t * (std::log(w / r) + 1.0) - a * r * r -
                       c_v * r * t * (std::log(t) - 1.0);
            },
            [=](double r, double t) {
                const double w = covol(r);
                return -R * t * std::log(w / r) + b * r * R * t / w - 2.0 * a * r -
                       c_v * t * (std::log(t) - 1.0);
            },
            [=](double r, double t) {
                const double w = covol(r);
                return -r * R * (std::log(w / r) + 1.0) - c_v * r * std::log(t);
            },
            [=](double r, double t) {
                const double w = covol(r);
                return R * t / (r * w * w) - 2.0 * a;
            },
            [=](double r, double t) {
                const double w = covol(r);
                return -R * std::log(w / r) + b * r * R / w - c_v * std::log(t);
            },
            [=](double r, double t) { return -c_v * r / t; });
        m.p = ScalarField::analytic(
            [=](double r, double t) { return r * R * t / covol(r) - a * r * r; },
            [=](double r, double t) {
                const double w = covol(r);
                return R * t / (w * w) - 2.0 * a * r;
            },
            [=](double r, double) { return r * R / covol(r); },
            [=](double r, double t) {
                const double w = covol(r);
                return 2.0 * b * R * t / (w * w * w) - 2.0 * a;
            },
            [=](double r, double) {
                const double w = covol(r);
                return R / (w * w);
            },
            [](double, double) { return 0.0; });
        return m;
    }
};

}  // namespace viscotherm
