// Command-line front end: every command reads one JSON config file; flags
// only select the command, the config path and the output directory.
//
// Exit codes: 0 success, 1 verification failure, 2 model/config error,
//             3 CFL refusal, 4 numerical abort.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>

#include "viscotherm/config.hpp"
#include "viscotherm/verify.hpp"

namespace vt = viscotherm;
namespace cfg = viscotherm::config;

namespace {

int cmd_invariants(const cfg::json& j) {
    const cfg::InvariantsConfig c = cfg::InvariantsConfig::from_json(j);
    const vt::Metric g = c.geometry.make_metric();
    const vt::TraceInvariants d = vt::general_invariants(c.delta, g);
    if (g.dim() == 2) {
        const vt::ComplexStructure cs = c.geometry.make_complex_structure(g);
        const vt::KahlerInvariants t = vt::kahler_invariants(c.delta, g, cs);
        const vt::ReductionReport r = vt::verify_reduction_relations(c.delta, g, cs);
        std::cout << "d1,d2,d3,t1,t2,t3,t4,t5,t6,t7,r4,r5,r6,r7\n";
        const double vals[] = {d.d1, d.d2, d.d3, t.t1, t.t2, t.t3, t.t4,
                               t.t5, t.t6, t.t7, r.r4, r.r5, r.r6, r.r7};
        for (int k = 0; k < 14; ++k)
            std::cout << vt::format_double(vals[k]) << (k == 13 ? '\n' : ',');
    } else {
        std::cout << "d1,d2,d3\n";
        std::cout << vt::format_double(d.d1) << ',' << vt::format_double(d.d2) << ','
                  << vt::format_double(d.d3) << '\n';
    }
    return 0;
}

int cmd_stress(const cfg::json& j) {
    const cfg::StressConfig c = cfg::StressConfig::from_json(j);
    const vt::Model model = c.model.build(c.geometry);
    const vt::CoefficientModel coeffs = c.model.coefficients.build();
    const vt::ThermoState state{c.rho, c.T, c.delta};
    const vt::DerivedState derived = vt::derived_quantities(state, coeffs, model);
    const vt::Mat fd = vt::stress_autodiff(state, coeffs, model, c.fd_step);
    double rel = 0.0;
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    rel = (derived.sigma - fd).cwiseAbs().maxCoeff() / scale;

    std::cout << "quantity,value\n";
    std::cout << "h," << vt::format_double(derived.h) << '\n';
    std::cout << "s," << vt::format_double(derived.s) << '\n';
    std::cout << "e," << vt::format_double(derived.e) << '\n';
    std::cout << "eta," << vt::format_double(derived.eta) << '\n';
    const int n = model.dim();
    for (int r = 0; r < n; ++r)
        for (int col = 0; col < n; ++col)
            std::cout << "sigma_" << (r + 1) << (col + 1) << ','
                      << vt::format_double(derived.sigma(r, col)) << '\n';
    std::cout << "autodiff_max_rel_diff," << vt::format_double(rel) << '\n';
    return 0;
}

int cmd_coexist(const cfg::json& j, const std::string& outdir) {
    const cfg::CoexistConfig c = cfg::CoexistConfig::from_json(j);
    const vt::Model model = c.model.build(c.geometry);
    const vt::CoefficientModel coeffs = c.model.coefficients.build();
    const vt::Mat delta =
        c.delta ? *c.delta : vt::Mat::Zero(model.dim(), model.dim()).eval();

    vt::TraceOptions opt;
    opt.seed_grid = c.seed_grid;
    opt.tol = c.tol;
    opt.step_divisor = c.step_divisor;
    opt.bisect_width = c.bisect_width;
    const vt::TraceResult result =
        vt::trace_coexistence_curve(coeffs, model, delta, c.window, opt);

    std::filesystem::create_directories(outdir);
    const std::string path = outdir + "/" + c.output;
    vt::write_curve_csv(path, result);
    std::cerr << "wrote " << result.points.size() << " points in " << result.branches
              << " branch(es) to " << path;
    if (result.dropped_points > 0)
        std::cerr << " (" << result.dropped_points << " corrector failures)";
    std::cerr << '\n';

    if (c.closed_form_check) {
        const int G = c.seed_grid;
        auto det_fn = [&](double rho, double T) {
            return vt::degeneracy_residual(vt::ThermoState{rho, T, delta}, coeffs, model);
        };
        vt::EtaBinding binding = vt::kDefaultEtaBinding;
        if (model.kind == vt::ModelKind::Surface2D) {
            if (c.eta_binding == "auto") {
                const vt::EtaBindingReport rep = vt::select_eta_binding();
                binding = rep.selected;
                std::cout << "eta binding selected: " << vt::to_string(binding)
                          << " (score " << vt::format_double(rep.score_zeta) << " vs "
                          << vt::format_double(rep.score_zeta_minus_mu) << ")\n";
            } else {
                binding = c.eta_binding == "zeta" ? vt::EtaBinding::Zeta
                                                  : vt::EtaBinding::ZetaMinusMu;
            }
        }
        auto cond_fn = [&](double rho, double T) {
            const vt::ThermoState s{rho, T, delta};
            return model.kind == vt::ModelKind::BulkN
                       ? vt::coexistence_condition_bulk(s, coeffs, model)
                       : vt::coexistence_condition_surface(s, coeffs, model, binding);
        };
        const auto cmp = vt::compare_zero_sets(vt::sign_change_cells(det_fn, c.window, G),
                                               vt::sign_change_cells(cond_fn, c.window, G), G);
        std::cout << "closed-form check: determinant cells " << cmp.cells_a
                  << ", condition cells " << cmp.cells_b << ", unmatched " << cmp.unmatched
                  << (cmp.coincide() ? " (zero sets coincide)" : " (zero sets differ)") << '\n';
    }
    return 0;
}

int cmd_simulate(const cfg::json& j, const std::string& outdir) {
    const cfg::SimulateConfig c = cfg::SimulateConfig::from_json(j);
    const vt::SimCoefficients coeffs = vt::SimCoefficients::from_model(c.coefficients.build());
    const vt::SimState initial = c.initial.build(c.grid, coeffs);
    vt::SimRunConfig rc;
    rc.dt = c.dt;
    rc.t_end = c.t_end;
    rc.snapshot_every = c.snapshot_every;
    rc.cfl = c.cfl;
    const vt::RunResult r = vt::run(initial, coeffs, rc, outdir, c.output_prefix);
    std::cerr << "ran " << r.steps << " steps (dt " << r.dt << "), wrote "
              << r.snapshot_files.size() << " snapshots and manifest.json to " << outdir << '\n';
    return 0;
}

int cmd_verify(const cfg::json& j) {
    const cfg::VerifyConfig c = cfg::VerifyConfig::from_json(j);
    const vt::Fixture fx = vt::fixture_from_string(c.fixture);
    if (fx != vt::Fixture::None)
        std::cout << "running with fixture '" << c.fixture << "' (expected to fail)\n";
    const auto results = vt::run_verification_suite(fx);
    vt::print_report(std::cout, results);
    return vt::all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"viscotherm: thermodynamics of moving viscous media on flat 2D/3D domains"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir = ".";

    CLI::App* invariants = app.add_subcommand("invariants", "tensor invariants of a deformation");
    CLI::App* stress = app.add_subcommand("stress", "stress and derived state at a point");
    CLI::App* coexist = app.add_subcommand("coexist", "trace the co-existence curve");
    CLI::App* simulate = app.add_subcommand("simulate", "run the plane flow solver");
    CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
    for (CLI::App* sub : {invariants, stress, coexist, simulate, verify}) {
        auto* opt = sub->add_option("config", config_path, "JSON config file");
        if (sub != verify) opt->required();
        sub->add_option("--output-dir", output_dir, "directory for output files");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        const cfg::json j = config_path.empty() ? cfg::json::object()
                                                : cfg::load_json_file(config_path);
        if (invariants->parsed()) return cmd_invariants(j);
        if (stress->parsed()) return cmd_stress(j);
        if (coexist->parsed()) return cmd_coexist(j, output_dir);
        if (simulate->parsed()) return cmd_simulate(j, output_dir);
        if (verify->parsed()) return cmd_verify(j);
    } catch (const vt::CflError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const vt::NumericalAbortError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const vt::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const vt::SingularCoefficientError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
