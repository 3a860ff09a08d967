#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "viscotherm/coexistence.hpp"
#include "viscotherm/simulation.hpp"
#include "viscotherm/thermo.hpp"

namespace viscotherm::config {

using nlohmann::json;

inline json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& context) {
    if (!j.is_object()) throw ConfigError(context + ": expected an object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw ConfigError(context + ": unknown key '" + item.key() + "'");
}

inline double get_num(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError("'" + key + "' must be a number");
    return j.at(key).get<double>();
}

inline double require_num(const json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key)) throw ConfigError(context + ": missing required key '" + key + "'");
    if (!j.at(key).is_number()) throw ConfigError(context + ": '" + key + "' must be a number");
    return j.at(key).get<double>();
}

inline Mat parse_matrix(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a matrix (array of rows)");
    const int n = static_cast<int>(j.size());
    Mat m(n, n);
    for (int r = 0; r < n; ++r) {
        const json& row = j.at(r);
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw ConfigError(what + ": expected a square matrix");
        for (int c = 0; c < n; ++c) {
            if (!row.at(c).is_number()) throw ConfigError(what + ": matrix entries must be numbers");
            m(r, c) = row.at(c).get<double>();
        }
    }
    return m;
}

inline json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct GeometrySpec {
    int dimension = 2;
    std::optional<Mat> metric_entries;  ///< absent: Euclidean
    std::optional<Mat> cs_entries;      ///< absent: derived from the metric

    static GeometrySpec from_json(const json& j) {
        detail::check_keys(j, {"dimension", "metric", "complex_structure"}, "geometry");
        GeometrySpec g;
        g.dimension = static_cast<int>(detail::get_num(j, "dimension", 2));
        if (g.dimension != 2 && g.dimension != 3)
            throw ConfigError("geometry: dimension must be 2 or 3");
        if (j.contains("metric") && !(j.at("metric").is_string() && j.at("metric") == "euclidean"))
            g.metric_entries = detail::parse_matrix(j.at("metric"), "geometry.metric");
        if (j.contains("complex_structure") &&
            !(j.at("complex_structure").is_string() && j.at("complex_structure") == "from_metric"))
            g.cs_entries =
                detail::parse_matrix(j.at("complex_structure"), "geometry.complex_structure");
        if (g.metric_entries && g.metric_entries->rows() != g.dimension)
            throw ConfigError("geometry: metric size does not match dimension");
        return g;
    }

    json to_json() const {
        json j;
        j["dimension"] = dimension;
        j["metric"] = metric_entries ? detail::matrix_to_json(*metric_entries)
                                     : json("euclidean");
        j["complex_structure"] =
            cs_entries ? detail::matrix_to_json(*cs_entries) : json("from_metric");
        return j;
    }

    Metric make_metric() const {
        try {
            return metric_entries ? Metric(*metric_entries) : Metric::euclidean(dimension);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("geometry: ") + e.what());
        }
    }

    ComplexStructure make_complex_structure(const Metric& g) const {
        try {
            return cs_entries ? ComplexStructure(*cs_entries, g)
                              : ComplexStructure::from_metric(g);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("geometry: ") + e.what());
        }
    }
};

// ---------------------------------------------------------------------------

struct CoefficientsSpec {
    std::string type = "constant";  // constant | quadratic | ideal_gas | van_der_waals
    double mu = 1.0, tau = 0.0, zeta = 1.0, alpha = 0.0;
    double q0 = 0.0, q1 = 0.0;  ///< q(rho) = q0 + q1 rho
    double c_p = 1.0, kappa_th = 0.0;
    double p0 = 0.0, h0c = 0.0;                                  // constant
    double A = 1.0, B = 1.0, rho0 = 1.0, T0 = 1.0, C = 0.0;      // quadratic
    double R = 8.0 / 3.0, a = 3.0, b = 1.0 / 3.0, c_v = 1.5;     // gas models

    static CoefficientsSpec from_json(const json& j) {
        detail::check_keys(j,
                           {"type", "mu", "tau", "zeta", "alpha", "q0", "q1", "c_p", "kappa_th",
                            "p", "h0", "A", "B", "rho0", "T0", "C", "R", "a", "b", "c_v"},
                           "coefficients");
        CoefficientsSpec c;
        c.type = j.value("type", std::string("constant"));
        if (c.type != "constant" && c.type != "quadratic" && c.type != "ideal_gas" &&
            c.type != "van_der_waals")
            throw ConfigError("coefficients: unknown type '" + c.type + "'");
        c.mu = detail::get_num(j, "mu", c.mu);
        c.tau = detail::get_num(j, "tau", c.tau);
        c.zeta = detail::get_num(j, "zeta", c.zeta);
        c.alpha = detail::get_num(j, "alpha", c.alpha);
        c.q0 = detail::get_num(j, "q0", c.q0);
        c.q1 = detail::get_num(j, "q1", c.q1);
        c.c_p = detail::get_num(j, "c_p", c.c_p);
        c.kappa_th = detail::get_num(j, "kappa_th", c.kappa_th);
        c.p0 = detail::get_num(j, "p", c.p0);
        c.h0c = detail::get_num(j, "h0", c.h0c);
        c.A = detail::get_num(j, "A", c.A);
        c.B = detail::get_num(j, "B", c.B);
        c.rho0 = detail::get_num(j, "rho0", c.rho0);
        c.T0 = detail::get_num(j, "T0", c.T0);
        c.C = detail::get_num(j, "C", c.C);
        c.R = detail::get_num(j, "R", c.R);
        c.a = detail::get_num(j, "a", c.a);
        c.b = detail::get_num(j, "b", c.b);
        c.c_v = detail::get_num(j, "c_v", c.c_v);
        if (!(c.c_p > 0.0)) throw ConfigError("coefficients: c_p must be positive");
        if (c.kappa_th < 0.0) throw ConfigError("coefficients: kappa_th must be >= 0");
        return c;
    }

    json to_json() const {
        json j;
        j["type"] = type;
        j["mu"] = mu;
        j["tau"] = tau;
        j["zeta"] = zeta;
        j["alpha"] = alpha;
        j["q0"] = q0;
        j["q1"] = q1;
        j["c_p"] = c_p;
        j["kappa_th"] = kappa_th;
        if (type == "constant") {
            j["p"] = p0;
            j["h0"] = h0c;
        } else if (type == "quadratic") {
            j["A"] = A;
            j["B"] = B;
            j["rho0"] = rho0;
            j["T0"] = T0;
            j["C"] = C;
        } else {
            j["R"] = R;
            if (type == "van_der_waals") {
                j["a"] = a;
                j["b"] = b;
            }
            j["c_v"] = c_v;
        }
        return j;
    }

    CoefficientModel build() const {
        CoefficientModel m;
        if (type == "constant")
            m = CoefficientModel::constants(mu, tau, zeta, alpha, p0, q0, h0c, c_p, kappa_th);
        else if (type == "quadratic")
            m = CoefficientModel::quadratic(A, B, rho0, T0, C, mu, tau, zeta, alpha, q0, c_p,
                                            kappa_th);
        else if (type == "ideal_gas")
            m = CoefficientModel::ideal_gas(R, c_v, mu, tau, zeta, alpha, q0, c_p, kappa_th);
        else
            m = CoefficientModel::van_der_waals(R, a, b, c_v, mu, tau, zeta, alpha, q0, c_p,
                                                kappa_th);
        if (q1 != 0.0) {
            const double q0c = q0, q1c = q1;
            m.q = ScalarField::analytic([=](double r, double) { return q0c + q1c * r; },
                                        [=](double, double) { return q1c; },
                                        [](double, double) { return 0.0; },
                                        [](double, double) { return 0.0; },
                                        [](double, double) { return 0.0; },
                                        [](double, double) { return 0.0; });
        }
        return m;
    }
};

// ---------------------------------------------------------------------------

struct ModelSpec {
    std::string kind = "bulk";  // bulk | surface
    CoefficientsSpec coefficients;

    static ModelSpec from_json(const json& j) {
        detail::check_keys(j, {"kind", "coefficients"}, "model");
        ModelSpec m;
        m.kind = j.value("kind", std::string("bulk"));
        if (m.kind != "bulk" && m.kind != "surface")
            throw ConfigError("model: kind must be 'bulk' or 'surface'");
        if (j.contains("coefficients"))
            m.coefficients = CoefficientsSpec::from_json(j.at("coefficients"));
        return m;
    }

    json to_json() const {
        json j;
        j["kind"] = kind;
        j["coefficients"] = coefficients.to_json();
        return j;
    }

    Model build(const GeometrySpec& geo) const {
        const Metric g = geo.make_metric();
        if (kind == "surface") {
            if (g.dim() != 2) throw ConfigError("model: surface kind requires dimension 2");
            return Model::surface(g, geo.make_complex_structure(g));
        }
        return Model::bulk(g);
    }
};

// ---------------------------------------------------------------------------

struct InvariantsConfig {
    GeometrySpec geometry;
    Mat delta;

    static InvariantsConfig from_json(const json& j) {
        detail::check_keys(j, {"geometry", "delta"}, "invariants config");
        InvariantsConfig c;
        if (j.contains("geometry")) c.geometry = GeometrySpec::from_json(j.at("geometry"));
        if (!j.contains("delta")) throw ConfigError("invariants config: missing 'delta'");
        c.delta = detail::parse_matrix(j.at("delta"), "delta");
        if (c.delta.rows() != c.geometry.dimension)
            throw ConfigError("invariants config: delta size does not match dimension");
        return c;
    }

    json to_json() const {
        json j;
        j["geometry"] = geometry.to_json();
        j["delta"] = detail::matrix_to_json(delta);
        return j;
    }
};

struct StressConfig {
    GeometrySpec geometry;
    ModelSpec model;
    double rho = 1.0, T = 1.0;
    Mat delta;
    double fd_step = 1e-4;

    static StressConfig from_json(const json& j) {
        detail::check_keys(j, {"geometry", "model", "state", "fd_step"}, "stress config");
        StressConfig c;
        if (j.contains("geometry")) c.geometry = GeometrySpec::from_json(j.at("geometry"));
        if (!j.contains("model")) throw ConfigError("stress config: missing 'model'");
        c.model = ModelSpec::from_json(j.at("model"));
        if (!j.contains("state")) throw ConfigError("stress config: missing 'state'");
        const json& st = j.at("state");
        detail::check_keys(st, {"rho", "T", "delta"}, "state");
        c.rho = detail::require_num(st, "rho", "state");
        c.T = detail::require_num(st, "T", "state");
        if (!(c.rho > 0.0) || !(c.T > 0.0))
            throw ConfigError("state: rho and T must be positive");
        if (!st.contains("delta")) throw ConfigError("state: missing 'delta'");
        c.delta = detail::parse_matrix(st.at("delta"), "state.delta");
        if (c.delta.rows() != c.geometry.dimension)
            throw ConfigError("state: delta size does not match dimension");
        c.fd_step = detail::get_num(j, "fd_step", c.fd_step);
        if (!(c.fd_step > 0.0)) throw ConfigError("stress config: fd_step must be positive");
        return c;
    }

    json to_json() const {
        json j;
        j["geometry"] = geometry.to_json();
        j["model"] = model.to_json();
        j["state"] = {{"rho", rho}, {"T", T}, {"delta", detail::matrix_to_json(delta)}};
        j["fd_step"] = fd_step;
        return j;
    }
};

struct CoexistConfig {
    GeometrySpec geometry;
    ModelSpec model;
    std::optional<Mat> delta;  ///< absent: zero deformation
    Window window;
    int seed_grid = 64;
    double tol = 1e-10;
    int step_divisor = 512;
    double bisect_width = 1e-12;
    bool closed_form_check = false;
    std::string eta_binding = "auto";  // auto | zeta | zeta_minus_mu
    std::string output = "coexistence.csv";

    static CoexistConfig from_json(const json& j) {
        detail::check_keys(j,
                           {"geometry", "model", "delta", "window", "seed_grid", "tol",
                            "step_divisor", "bisect_width", "closed_form_check", "eta_binding",
                            "output"},
                           "coexist config");
        CoexistConfig c;
        if (j.contains("geometry")) c.geometry = GeometrySpec::from_json(j.at("geometry"));
        if (!j.contains("model")) throw ConfigError("coexist config: missing 'model'");
        c.model = ModelSpec::from_json(j.at("model"));
        if (j.contains("delta")) c.delta = detail::parse_matrix(j.at("delta"), "delta");
        if (c.delta && c.delta->rows() != c.geometry.dimension)
            throw ConfigError("coexist config: delta size does not match dimension");
        if (!j.contains("window")) throw ConfigError("coexist config: missing 'window'");
        const json& w = j.at("window");
        detail::check_keys(w, {"rho_min", "rho_max", "T_min", "T_max"}, "window");
        c.window.rho_min = detail::require_num(w, "rho_min", "window");
        c.window.rho_max = detail::require_num(w, "rho_max", "window");
        c.window.T_min = detail::require_num(w, "T_min", "window");
        c.window.T_max = detail::require_num(w, "T_max", "window");
        try {
            c.window.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        c.seed_grid = static_cast<int>(detail::get_num(j, "seed_grid", c.seed_grid));
        if (c.seed_grid < 4) throw ConfigError("coexist config: seed_grid must be >= 4");
        c.tol = detail::get_num(j, "tol", c.tol);
        if (!(c.tol > 0.0)) throw ConfigError("coexist config: tol must be positive");
        c.step_divisor = static_cast<int>(detail::get_num(j, "step_divisor", c.step_divisor));
        if (c.step_divisor < 8) throw ConfigError("coexist config: step_divisor must be >= 8");
        c.bisect_width = detail::get_num(j, "bisect_width", c.bisect_width);
        if (!(c.bisect_width > 0.0))
            throw ConfigError("coexist config: bisect_width must be positive");
        if (j.contains("closed_form_check")) {
            if (!j.at("closed_form_check").is_boolean())
                throw ConfigError("coexist config: closed_form_check must be a boolean");
            c.closed_form_check = j.at("closed_form_check").get<bool>();
        }
        c.eta_binding = j.value("eta_binding", c.eta_binding);
        if (c.eta_binding != "auto" && c.eta_binding != "zeta" &&
            c.eta_binding != "zeta_minus_mu")
            throw ConfigError("coexist config: eta_binding must be auto|zeta|zeta_minus_mu");
        c.output = j.value("output", c.output);
        return c;
    }

    json to_json() const {
        json j;
        j["geometry"] = geometry.to_json();
        j["model"] = model.to_json();
        if (delta) j["delta"] = detail::matrix_to_json(*delta);
        j["window"] = {{"rho_min", window.rho_min},
                       {"rho_max", window.rho_max},
                       {"T_min", window.T_min},
                       {"T_max", window.T_max}};
        j["seed_grid"] = seed_grid;
        j["tol"] = tol;
        j["step_divisor"] = step_divisor;
        j["bisect_width"] = bisect_width;
        j["closed_form_check"] = closed_form_check;
        j["eta_binding"] = eta_binding;
        j["output"] = output;
        return j;
    }
};

struct InitialSpec {
    std::string type = "uniform";  // uniform | taylor_green | density_wave
    double u0 = 0.0, v0 = 0.0, rho0 = 1.0, T0 = 1.0;
    double U = 1.0;
    bool compressible_balance = true;
    double amp_rho = 0.1, amp_u = 0.5;

    static InitialSpec from_json(const json& j) {
        detail::check_keys(j,
                           {"type", "u0", "v0", "rho0", "T0", "U", "compressible_balance",
                            "amp_rho", "amp_u"},
                           "initial");
        InitialSpec s;
        s.type = j.value("type", s.type);
        if (s.type != "uniform" && s.type != "taylor_green" && s.type != "density_wave")
            throw ConfigError("initial: unknown type '" + s.type + "'");
        s.u0 = detail::get_num(j, "u0", s.u0);
        s.v0 = detail::get_num(j, "v0", s.v0);
        s.rho0 = detail::get_num(j, "rho0", s.rho0);
        s.T0 = detail::get_num(j, "T0", s.T0);
        s.U = detail::get_num(j, "U", s.U);
        if (j.contains("compressible_balance"))
            s.compressible_balance = j.at("compressible_balance").get<bool>();
        s.amp_rho = detail::get_num(j, "amp_rho", s.amp_rho);
        s.amp_u = detail::get_num(j, "amp_u", s.amp_u);
        if (!(s.rho0 > 0.0) || !(s.T0 > 0.0))
            throw ConfigError("initial: rho0 and T0 must be positive");
        if (s.type == "density_wave" && std::abs(s.amp_rho) >= 1.0)
            throw ConfigError("initial: |amp_rho| must be < 1");
        return s;
    }

    json to_json() const {
        json j;
        j["type"] = type;
        j["rho0"] = rho0;
        j["T0"] = T0;
        if (type == "uniform") {
            j["u0"] = u0;
            j["v0"] = v0;
        } else if (type == "taylor_green") {
            j["U"] = U;
            j["compressible_balance"] = compressible_balance;
        } else {
            j["amp_rho"] = amp_rho;
            j["amp_u"] = amp_u;
        }
        return j;
    }

    SimState build(const Grid& g, const SimCoefficients& c) const {
        if (type == "taylor_green")
            return init_taylor_green(g, U, rho0, T0, c, compressible_balance);
        if (type == "density_wave") return init_density_wave(g, rho0, T0, amp_rho, amp_u);
        return init_uniform(g, u0, v0, rho0, T0);
    }
};

struct SimulateConfig {
    CoefficientsSpec coefficients;
    Grid grid;
    double dt = 0.0;  ///< 0: automatic
    double t_end = 1.0;
    double snapshot_every = 0.0;
    double cfl = 0.4;
    InitialSpec initial;
    std::string output_prefix = "snap";

    static SimulateConfig from_json(const json& j) {
        detail::check_keys(j,
                           {"coefficients", "grid", "dt", "t_end", "snapshot_every", "cfl",
                            "initial", "output_prefix"},
                           "simulate config");
        SimulateConfig c;
        if (!j.contains("coefficients")) throw ConfigError("simulate config: missing 'coefficients'");
        c.coefficients = CoefficientsSpec::from_json(j.at("coefficients"));
        if (!(c.coefficients.mu > 0.0))
            throw ConfigError("simulate config: mu must be positive");
        if (!j.contains("grid")) throw ConfigError("simulate config: missing 'grid'");
        const json& g = j.at("grid");
        detail::check_keys(g, {"nx", "ny", "Lx", "Ly"}, "grid");
        c.grid.nx = static_cast<int>(detail::require_num(g, "nx", "grid"));
        c.grid.ny = static_cast<int>(detail::require_num(g, "ny", "grid"));
        c.grid.Lx = detail::require_num(g, "Lx", "grid");
        c.grid.Ly = detail::require_num(g, "Ly", "grid");
        try {
            c.grid.validate();
        } catch (const ConfigError&) {
            throw;
        }
        if (j.contains("dt")) {
            if (j.at("dt").is_string()) {
                if (j.at("dt") != "auto") throw ConfigError("simulate config: dt must be a number or 'auto'");
            } else {
                c.dt = detail::require_num(j, "dt", "simulate config");
                if (!(c.dt > 0.0)) throw ConfigError("simulate config: dt must be positive");
            }
        }
        c.t_end = detail::require_num(j, "t_end", "simulate config");
        if (!(c.t_end > 0.0)) throw ConfigError("simulate config: t_end must be positive");
        c.snapshot_every = detail::get_num(j, "snapshot_every", c.snapshot_every);
        if (c.snapshot_every < 0.0)
            throw ConfigError("simulate config: snapshot_every must be >= 0");
        c.cfl = detail::get_num(j, "cfl", c.cfl);
        if (!(c.cfl > 0.0) || c.cfl > 0.4)
            throw ConfigError("simulate config: cfl must be in (0, 0.4]");
        if (j.contains("initial")) c.initial = InitialSpec::from_json(j.at("initial"));
        c.output_prefix = j.value("output_prefix", c.output_prefix);
        return c;
    }

    json to_json() const {
        json j;
        j["coefficients"] = coefficients.to_json();
        j["grid"] = {{"nx", grid.nx}, {"ny", grid.ny}, {"Lx", grid.Lx}, {"Ly", grid.Ly}};
        j["dt"] = dt > 0.0 ? json(dt) : json("auto");
        j["t_end"] = t_end;
        j["snapshot_every"] = snapshot_every;
        j["cfl"] = cfl;
        j["initial"] = initial.to_json();
        j["output_prefix"] = output_prefix;
        return j;
    }
};

struct VerifyConfig {
    std::string fixture = "none";

    static VerifyConfig from_json(const json& j) {
        detail::check_keys(j, {"fixture"}, "verify config");
        VerifyConfig c;
        c.fixture = j.value("fixture", c.fixture);
        if (c.fixture != "none" && c.fixture != "stress_sign_flip" &&
            c.fixture != "kappa_corruption")
            throw ConfigError("verify config: unknown fixture '" + c.fixture + "'");
        return c;
    }

    json to_json() const {
        json j;
        j["fixture"] = fixture;
        return j;
    }
};

}  // namespace viscotherm::config
