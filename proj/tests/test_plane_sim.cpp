#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "viscotherm/simulation.hpp"
#include "viscotherm/thermo.hpp"

using namespace viscotherm;

namespace {

SimCoefficients make_coeffs(double mu, double tau, double zeta, double alpha, double p0,
                            double q0, double c_p = 1.0, double kth = 0.0) {
    return SimCoefficients::from_model(
        CoefficientModel::constants(mu, tau, zeta, alpha, p0, q0, 0.0, c_p, kth));
}

Grid square_grid(int n, double L = 2.0 * M_PI) { return Grid{n, n, L, L}; }

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace

TEST(StressField, ZeroVelocityGivesRestStress) {
    const Grid g = square_grid(16);
    SimState s = init_uniform(g, 0.0, 0.0, 1.3, 0.9);
    const SimCoefficients c = make_coeffs(1.0, 0.5, 2.0, 0.3, 0.7, 0.25);
    const StressFields f = stress_field(s, c);
    for (int k = 0; k < g.cells(); ++k) {
        EXPECT_EQ(f.sxx[k], -0.7);
        EXPECT_EQ(f.sxy[k], -0.25);
        EXPECT_EQ(f.syx[k], 0.25);
        EXPECT_EQ(f.syy[k], -0.7);
    }
}

TEST(StressField, MatchesRestStateThermoStressForUniformFlow) {
    const Grid g = square_grid(12);
    SimState s = init_uniform(g, 0.8, -0.3, 1.1, 1.4);
    CoefficientModel cm = CoefficientModel::ideal_gas(2.0, 1.0, 1.0, 0.5, 2.0, 0.3, 0.25);
    const SimCoefficients c = SimCoefficients::from_model(cm);
    const StressFields f = stress_field(s, c);
    const Mat sigma0 =
        stress_closed_form(ThermoState::rest(1.1, 1.4, 2), cm, Model::surface_flat());
    for (int k = 0; k < g.cells(); ++k) {
        EXPECT_EQ(f.sxx[k], sigma0(0, 0));
        EXPECT_EQ(f.sxy[k], sigma0(0, 1));
        EXPECT_EQ(f.syx[k], sigma0(1, 0));
        EXPECT_EQ(f.syy[k], sigma0(1, 1));
    }
}

TEST(StressField, SinusoidalShearComponents) {
    // u = sin(y), v = 0, alpha = q = 0:
    // sxy = (mu+tau) cos y, syx = (mu-tau) cos y up to O(dy^2)
    const int n = 64;
    const Grid g = square_grid(n);
    SimState s = init_uniform(g, 0.0, 0.0, 1.0, 1.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) s.u[s.idx(i, j)] = std::sin(j * g.dy());
    const SimCoefficients c = make_coeffs(1.0, 0.4, 2.0, 0.0, 0.0, 0.0);
    const StressFields f = stress_field(s, c);
    const double tol = 2.0 * g.dy() * g.dy();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double cy = std::cos(j * g.dy());
            EXPECT_NEAR(f.sxy[s.idx(i, j)], 1.4 * cy, tol);
            EXPECT_NEAR(f.syx[s.idx(i, j)], 0.6 * cy, tol);
            EXPECT_NEAR(f.sxx[s.idx(i, j)], 0.0, tol);
        }
}

TEST(StressField, RigidRotationAntisymmetricPart) {
    // u = -w y, v = w x on interior points (the linear field is not
    // periodic, so skip stencils that wrap)
    const int n = 32;
    const Grid g{n, n, 1.0, 1.0};
    SimState s = init_uniform(g, 0.0, 0.0, 1.0, 1.0);
    const double w = 0.7;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            s.u[s.idx(i, j)] = -w * (j * g.dy());
            s.v[s.idx(i, j)] = w * (i * g.dx());
        }
    const double q0 = 0.3, tau = 0.45;
    const SimCoefficients c = make_coeffs(1.0, tau, 2.0, 0.0, 0.8, q0);
    const StressFields f = stress_field(s, c);
    for (int j = 2; j < n - 2; ++j)
        for (int i = 2; i < n - 2; ++i) {
            const int k = s.idx(i, j);
            EXPECT_NEAR(f.sxy[k] - f.syx[k], -2.0 * q0 - 4.0 * tau * w, 1e-12);
            EXPECT_NEAR(f.sxy[k] + f.syx[k], 0.0, 1e-12);  // symmetric shear part vanishes
            EXPECT_NEAR(f.sxx[k], -0.8, 1e-12);
        }
}

TEST(ContinuityRhs, UniformDensityDivergenceFreeFlow) {
    const int n = 48;
    const Grid g = square_grid(n);
    SimState s = init_uniform(g, 0.0, 0.0, 1.7, 1.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = i * g.dx(), y = j * g.dy();
            s.u[s.idx(i, j)] = std::sin(x) * std::cos(y);
            s.v[s.idx(i, j)] = -std::cos(x) * std::sin(y);
        }
    const auto rhs = continuity_rhs(s);
    for (int k = 0; k < g.cells(); ++k) EXPECT_NEAR(rhs[k], 0.0, 1e-13);
}

TEST(ContinuityRhs, PureAdvectionOfSinusoid) {
    const int n = 64;
    const Grid g = square_grid(n);
    SimState s = init_uniform(g, 0.9, 0.0, 1.0, 1.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) s.rho[s.idx(i, j)] = 1.5 + std::sin(i * g.dx());
    const auto rhs = continuity_rhs(s);
    const double tol = g.dx() * g.dx();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            EXPECT_NEAR(rhs[s.idx(i, j)], -0.9 * std::cos(i * g.dx()), tol);
}

TEST(ContinuityRhs, MatchesConservativeFormToDiscretizationOrder) {
    auto max_gap = [](int n) {
        const Grid g = square_grid(n);
        SimState s = init_uniform(g, 0.0, 0.0, 1.0, 1.0);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double x = i * g.dx(), y = j * g.dy();
                const int k = s.idx(i, j);
                s.u[k] = std::sin(x + 0.3) * std::cos(2.0 * y);
                s.v[k] = std::cos(x) * std::sin(y + 0.7);
                s.rho[k] = 1.5 + 0.4 * std::sin(2.0 * x) * std::sin(y);
            }
        const auto adv = continuity_rhs(s);
        double worst = 0.0;
        const double rdx = 1.0 / (2.0 * g.dx()), rdy = 1.0 / (2.0 * g.dy());
        for (int j = 0; j < n; ++j) {
            const int jp = (j + 1) % n, jm = (j + n - 1) % n;
            for (int i = 0; i < n; ++i) {
                const int ip = (i + 1) % n, im = (i + n - 1) % n;
                const int k = s.idx(i, j);
                const double cons =
                    -((s.rho[s.idx(ip, j)] * s.u[s.idx(ip, j)] -
                       s.rho[s.idx(im, j)] * s.u[s.idx(im, j)]) *
                          rdx +
                      (s.rho[s.idx(i, jp)] * s.v[s.idx(i, jp)] -
                       s.rho[s.idx(i, jm)] * s.v[s.idx(i, jm)]) *
                          rdy);
                worst = std::max(worst, std::abs(adv[k] - cons));
            }
        }
        return worst;
    };
    const double e32 = max_gap(32), e64 = max_gap(64);
    EXPECT_GE(std::log2(e32 / e64), 1.8);
}

TEST(TemperatureRhs, PureDiffusionOfSinusoid) {
    const int n = 64;
    const Grid g = square_grid(n);
    SimState s = init_uniform(g, 0.0, 0.0, 2.0, 1.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) s.T[s.idx(i, j)] = 2.0 + std::sin(i * g.dx());
    const double cp = 1.3, kth = 0.6;
    const SimCoefficients c = make_coeffs(1.0, 0.0, 2.0, 0.0, 0.0, 0.0, cp, kth);
    const auto rhs = temperature_rhs(s, c);
    const double tol = g.dx() * g.dx();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            EXPECT_NEAR(rhs[s.idx(i, j)], -kth * std::sin(i * g.dx()) / (cp * 2.0), tol);
}

TEST(TemperatureRhs, UniformFieldsAreSteady) {
    const Grid g = square_grid(16);
    const SimState s = init_uniform(g, 0.4, -0.2, 1.2, 0.9);
    const SimCoefficients c = make_coeffs(1.0, 0.5, 2.0, 0.3, 0.7, 0.25, 1.1, 0.3);
    for (double v : temperature_rhs(s, c)) EXPECT_EQ(v, 0.0);
}

TEST(TemperatureRhs, PureRotationWithSymmetricStressDoesNotHeat) {
    // tau = q = 0, uniform p: the contraction of the stress with a pure
    // rotation vanishes, so no viscous heating (interior points only; the
    // linear field wraps at the boundary)
    const int n = 32;
    const Grid g{n, n, 1.0, 1.0};
    SimState s = init_uniform(g, 0.0, 0.0, 1.0, 1.0);
    const double w = 0.5;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            s.u[s.idx(i, j)] = -w * (j * g.dy());
            s.v[s.idx(i, j)] = w * (i * g.dx());
        }
    const SimCoefficients c = make_coeffs(1.0, 0.0, 2.0, 0.0, 0.8, 0.0, 1.0, 0.0);
    const auto rhs = temperature_rhs(s, c);
    for (int j = 2; j < n - 2; ++j)
        for (int i = 2; i < n - 2; ++i) EXPECT_NEAR(rhs[s.idx(i, j)], 0.0, 1e-12);
}

TEST(MomentumRhs, UniformStateIsSteady) {
    const Grid g = square_grid(16);
    const SimState s = init_uniform(g, 0.0, 0.0, 1.2, 0.9);
    CoefficientModel cm = CoefficientModel::ideal_gas(2.0, 1.0, 1.0, 0.5, 2.0, 0.3, 0.25);
    const MomentumRhs r = momentum_rhs(s, SimCoefficients::from_model(cm));
    for (int k = 0; k < g.cells(); ++k) {
        EXPECT_EQ(r.du[k], 0.0);
        EXPECT_EQ(r.dv[k], 0.0);
    }
}

TEST(MomentumRhs, TaylorGreenViscousDecayRate) {
    // tau = alpha = q = 0, zeta = mu, uniform rho: after removing the
    // advective part, the RHS is -2 nu u up to O(h^2)
    const int n = 64;
    const Grid g = square_grid(n);
    const double mu = 0.02, rho0 = 1.0, nu = mu / rho0;
    SimState s = init_uniform(g, 0.0, 0.0, rho0, 1.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = i * g.dx(), y = j * g.dy();
            s.u[s.idx(i, j)] = std::sin(x) * std::cos(y);
            s.v[s.idx(i, j)] = -std::cos(x) * std::sin(y);
        }
    const SimCoefficients c = make_coeffs(mu, 0.0, mu, 0.0, 1.0, 0.0);
    const MomentumRhs r = momentum_rhs(s, c);
    const double rdx = 1.0 / (2.0 * g.dx()), rdy = 1.0 / (2.0 * g.dy());
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        const int jp = (j + 1) % n, jm = (j + n - 1) % n;
        for (int i = 0; i < n; ++i) {
            const int ip = (i + 1) % n, im = (i + n - 1) % n;
            const int k = s.idx(i, j);
            const double adv = s.u[k] * (s.u[s.idx(ip, j)] - s.u[s.idx(im, j)]) * rdx +
                               s.v[k] * (s.u[s.idx(i, jp)] - s.u[s.idx(i, jm)]) * rdy;
            worst = std::max(worst, std::abs(r.du[k] + adv - (-2.0 * nu * s.u[k])));
        }
    }
    EXPECT_LE(worst, 2.0 * nu * g.dx() * g.dx());
}

TEST(Step, UniformRestStateIsFixedPoint) {
    const Grid g = square_grid(16);
    const SimState s0 = init_uniform(g, 0.0, 0.0, 1.3, 0.8);
    CoefficientModel cm = CoefficientModel::ideal_gas(2.0, 1.0, 0.5, 0.2, 1.0, 0.1, 0.05, 1.0,
                                                      0.2);
    const SimCoefficients c = SimCoefficients::from_model(cm);
    SimState s = s0;
    for (int it = 0; it < 20; ++it) s = step(s, c, 1e-3);
    for (int k = 0; k < g.cells(); ++k) {
        EXPECT_EQ(s.u[k], 0.0);
        EXPECT_EQ(s.v[k], 0.0);
        EXPECT_EQ(s.rho[k], s0.rho[k]);
        EXPECT_EQ(s.T[k], s0.T[k]);
    }
}

TEST(Step, RefusesAboveStabilityBound) {
    const Grid g = square_grid(16);
    const SimState s = init_uniform(g, 1.0, 0.0, 1.0, 1.0);
    const SimCoefficients c = make_coeffs(0.5, 0.1, 0.5, 0.0, 1.0, 0.0);
    EXPECT_THROW(step(s, c, 10.0), CflError);
    EXPECT_NO_THROW(step(s, c, 0.9 * cfl_max_dt(s, c)));
}

TEST(Step, AbortsOnNonFiniteOrNegativeDensity) {
    const Grid g = square_grid(16);
    SimState s = init_uniform(g, 0.0, 0.0, 1.0, 1.0);
    const SimCoefficients c = make_coeffs(0.5, 0.1, 0.5, 0.0, 1.0, 0.0);
    s.u[5] = std::nan("");
    EXPECT_THROW(step(s, c, 1e-4), NumericalAbortError);
    s.u[5] = 0.0;
    s.rho[7] = -0.2;
    EXPECT_THROW(step(s, c, 1e-4), NumericalAbortError);
}

TEST(Step, FourthOrderInTime) {
    const Grid g = square_grid(24);
    CoefficientModel cm = CoefficientModel::ideal_gas(4.0, 1.0, 0.05, 0.02, 0.05, 0.0, 0.0);
    const SimCoefficients c = SimCoefficients::from_model(cm);
    const SimState s0 = init_taylor_green(g, 0.8, 1.0, 1.0, c);

    auto advance = [&](double dt, int steps) {
        SimState s = s0;
        for (int k = 0; k < steps; ++k) s = step(s, c, dt);
        return s;
    };
    auto gap = [&](const SimState& a, const SimState& b) {
        double m = 0.0;
        for (int k = 0; k < a.grid.cells(); ++k) {
            m = std::max(m, std::abs(a.u[k] - b.u[k]));
            m = std::max(m, std::abs(a.rho[k] - b.rho[k]));
        }
        return m;
    };
    const double dt = 4e-3;
    const SimState s1 = advance(dt, 8);
    const SimState s2 = advance(dt / 2.0, 16);
    const SimState s3 = advance(dt / 4.0, 32);
    const double ratio = gap(s1, s2) / gap(s2, s3);
    EXPECT_GE(ratio, 10.0);
    EXPECT_LE(ratio, 24.0);
}

TEST(SwapEquivariance, ExactStencilEquality) {
    std::mt19937_64 rng(99);
    const Grid g = square_grid(20, 3.0);
    SimState s = SimState::zeros(g);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < g.cells(); ++k) {
        s.u[k] = u(rng);
        s.v[k] = u(rng);
        s.rho[k] = 1.5 + 0.4 * u(rng);
        s.T[k] = 1.5 + 0.4 * u(rng);
    }
    CoefficientModel cm = CoefficientModel::ideal_gas(1.3, 1.0, 0.7, 0.3, 1.1, 0.25, 0.4, 1.2,
                                                      0.05);
    CoefficientModel cm_sw = cm;
    cm_sw.alpha = ScalarField::constant(-0.25);
    cm_sw.q = ScalarField::constant(-0.4);
    const SimCoefficients c = SimCoefficients::from_model(cm);
    const SimCoefficients c_sw = SimCoefficients::from_model(cm_sw);
    SimState sw = SimState::zeros(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            sw.u[sw.idx(i, j)] = s.v[s.idx(j, i)];
            sw.v[sw.idx(i, j)] = s.u[s.idx(j, i)];
            sw.rho[sw.idx(i, j)] = s.rho[s.idx(j, i)];
            sw.T[sw.idx(i, j)] = s.T[s.idx(j, i)];
        }
    const MomentumRhs m0 = momentum_rhs(s, c);
    const MomentumRhs m1 = momentum_rhs(sw, c_sw);
    const auto r0 = continuity_rhs(s);
    const auto r1 = continuity_rhs(sw);
    const auto t0 = temperature_rhs(s, c);
    const auto t1 = temperature_rhs(sw, c_sw);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int a = s.idx(i, j), b = s.idx(j, i);
            ASSERT_EQ(m1.du[a], m0.dv[b]);
            ASSERT_EQ(m1.dv[a], m0.du[b]);
            ASSERT_EQ(r1[a], r0[b]);
            ASSERT_EQ(t1[a], t0[b]);
        }
}

TEST(ThreadCap, ResultsIndependentOfThreadCount) {
    const Grid g = square_grid(24);
    std::mt19937_64 rng(1234);
    SimState s = SimState::zeros(g);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < g.cells(); ++k) {
        s.u[k] = u(rng);
        s.v[k] = u(rng);
        s.rho[k] = 1.5 + 0.4 * u(rng);
        s.T[k] = 1.5 + 0.4 * u(rng);
    }
    CoefficientModel cm = CoefficientModel::ideal_gas(1.3, 1.0, 0.7, 0.3, 1.1, 0.25, 0.4, 1.2,
                                                      0.05);
    const SimCoefficients c = SimCoefficients::from_model(cm);

    setenv("VISCOTHERM_THREADS", "1", 1);
    const MomentumRhs serial = momentum_rhs(s, c);
    const auto temp_serial = temperature_rhs(s, c);
    setenv("VISCOTHERM_THREADS", "7", 1);
    const MomentumRhs threaded = momentum_rhs(s, c);
    const auto temp_threaded = temperature_rhs(s, c);
    unsetenv("VISCOTHERM_THREADS");
    for (int k = 0; k < g.cells(); ++k) {
        ASSERT_EQ(serial.du[k], threaded.du[k]);
        ASSERT_EQ(serial.dv[k], threaded.dv[k]);
        ASSERT_EQ(temp_serial[k], temp_threaded[k]);
    }
}

TEST(Run, ZeroFlowDiagnosticsConstant) {
    const Grid g = square_grid(16);
    CoefficientModel cm = CoefficientModel::ideal_gas(2.0, 1.0, 0.5, 0.0, 0.5, 0.0, 0.0);
    const SimCoefficients c = SimCoefficients::from_model(cm);
    const SimState s0 = init_uniform(g, 0.0, 0.0, 1.2, 0.9);
    const std::string dir = "run_zero_flow_out";
    std::filesystem::remove_all(dir);
    SimRunConfig rc;
    rc.dt = 2e-3;
    rc.t_end = 0.1;
    rc.snapshot_every = 0.05;
    const RunResult r = run(s0, c, rc, dir);
    ASSERT_GE(r.series.size(), 3u);
    for (const auto& d : r.series) {
        EXPECT_EQ(d.mass, r.series.front().mass);
        EXPECT_EQ(d.kinetic_energy, 0.0);
        EXPECT_EQ(d.T_min, 0.9);
        EXPECT_EQ(d.T_max, 0.9);
    }
    EXPECT_TRUE(std::filesystem::exists(dir + "/manifest.json"));
}

TEST(Run, MassConservedAndEnergyDecays) {
    const Grid g = square_grid(32);
    CoefficientModel cm = CoefficientModel::ideal_gas(4.0, 1.0, 0.02, 0.005, 0.02, 0.0, 0.0);
    const SimCoefficients c = SimCoefficients::from_model(cm);
    const SimState s0 = init_taylor_green(g, 0.7, 1.0, 1.0, c);
    const std::string dir = "run_tg_out";
    std::filesystem::remove_all(dir);
    SimRunConfig rc;
    rc.dt = 2e-3;
    rc.t_end = 0.4;
    rc.snapshot_every = 0.1;
    const RunResult r = run(s0, c, rc, dir);
    const double m0 = r.series.front().mass;
    for (const auto& d : r.series) EXPECT_LE(std::abs(d.mass - m0) / m0, 1e-10);
    for (size_t i = 1; i < r.series.size(); ++i)
        EXPECT_LT(r.series[i].kinetic_energy, r.series[i - 1].kinetic_energy);
}

TEST(Run, DeterministicSnapshots) {
    const Grid g = square_grid(16);
    CoefficientModel cm = CoefficientModel::ideal_gas(4.0, 1.0, 0.05, 0.01, 0.05, 0.0, 0.0);
    const SimCoefficients c = SimCoefficients::from_model(cm);
    const SimState s0 = init_taylor_green(g, 0.5, 1.0, 1.0, c);
    SimRunConfig rc;
    rc.dt = 2e-3;
    rc.t_end = 0.05;
    rc.snapshot_every = 0.02;
    std::filesystem::remove_all("run_det_a");
    std::filesystem::remove_all("run_det_b");
    const RunResult ra = run(s0, c, rc, "run_det_a");
    const RunResult rb = run(s0, c, rc, "run_det_b");
    ASSERT_EQ(ra.snapshot_files.size(), rb.snapshot_files.size());
    for (size_t k = 0; k < ra.snapshot_files.size(); ++k) {
        const std::string a = slurp("run_det_a/" + ra.snapshot_files[k]);
        const std::string b = slurp("run_det_b/" + rb.snapshot_files[k]);
        EXPECT_FALSE(a.empty());
        EXPECT_EQ(a, b);
    }
    EXPECT_EQ(slurp("run_det_a/manifest.json"), slurp("run_det_b/manifest.json"));
}

TEST(Run, RefusesOversizedStepBeforeWritingState) {
    const Grid g = square_grid(16);
    const SimCoefficients c = make_coeffs(0.5, 0.1, 0.5, 0.0, 1.0, 0.0);
    const SimState s0 = init_uniform(g, 1.0, 0.0, 1.0, 1.0);
    SimRunConfig rc;
    rc.dt = 5.0;
    rc.t_end = 1.0;
    EXPECT_THROW(run(s0, c, rc, "run_refuse_out"), CflError);
}

TEST(Snapshot, HeaderAndRowMajorLayout) {
    const Grid g{8, 8, 1.0, 2.0};
    SimState s = SimState::zeros(g);
    s.u[s.idx(3, 2)] = 0.125;
    write_snapshot_csv("snap_layout.csv", s);
    std::ifstream is("snap_layout.csv");
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "x,y,u,v,rho,T");
    // row-major with x fastest: the cell (i=3, j=2) is line 2 + 2*8 + 3 + 1
    int lineno = 1;
    std::string hit;
    while (std::getline(is, line)) {
        ++lineno;
        if (lineno == 2 + 2 * 8 + 3) hit = line;
    }
    EXPECT_EQ(lineno, 1 + 64);
    EXPECT_NE(hit.find(",0.125,"), std::string::npos);
}
