#ifndef THINHOMOG_CLI_HPP
#define THINHOMOG_CLI_HPP

#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "cell.hpp"
#include "common.hpp"
#include "direct.hpp"
#include "geometry.hpp"
#include "limit.hpp"
#include "report.hpp"

namespace thinhomog {

/*! Slow-coordinate forcing selected by config:
    "one", "cos_pi", {"kind":"const","value":v}, {"kind":"cos","k":n},
    {"kind":"poly","coeffs":[...]}. */
struct Forcing {
    std::function<double(double)> fn;
    nlohmann::json echo;
};

inline Forcing make_forcing(const nlohmann::json &j) {
    using nlohmann::json;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "one") return {[](double) { return 1.0; }, json(s)};
        if (s == "cos_pi") return {[](double x) { return std::cos(kPi * x); }, json(s)};
        throw ConfigError("forcing: unknown shorthand '" + s + "'");
    }
    if (!j.is_object() || !j.contains("kind")) throw ConfigError("forcing: expected object with kind");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "const") {
        const double v = j.value("value", 1.0);
        return {[v](double) { return v; }, json{{"kind", "const"}, {"value", v}}};
    }
    if (kind == "cos") {
        const int k = j.value("k", 1);
        return {[k](double x) { return std::cos(kPi * k * x); }, json{{"kind", "cos"}, {"k", k}}};
    }
    if (kind == "poly") {
        auto c = j.at("coeffs").get<std::vector<double>>();
        return {[c](double x) {
                    double v = 0;
                    for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
                    return v;
                },
                json{{"kind", "poly"}, {"coeffs", c}}};
    }
    throw ConfigError("forcing: unknown kind '" + kind + "'");
}

/*! Parsed and validated run description: one command plus every knob it
    may need, with defaults filled in so the echo is canonical. */
struct RunConfig {
    std::string command;
    GeometrySpec geometry;
    nlohmann::json geometry_echo;
    nlohmann::json f0_echo = "cos_pi";
    std::vector<double> epsilons{0.25, 0.125, 0.0625};
    std::vector<double> deltas{0.1, 0.05, 0.025};
    std::vector<double> etas{0.4, 0.1, 0.025};
    double epsilon = 0.25;
    double x_station = 0.5;
    int n_cell = 64;
    int n_per_period = 16;
    int n_limit = 256;
    int stations_per_piece = 9;
    double tol = 1e-10;
    int threads = 1;
    double depth = -1;
    bool fhat_direct = false;
    std::string mode = "shift";
    std::vector<double> coeff_r, coeff_p; // optional synthetic coefficients
    std::vector<std::string> formats{"csv", "json"};
    std::string out_dir = ".";
    std::string timestamp; // empty: wall clock at run time

    std::function<double(double)> f0() const { return make_forcing(f0_echo).fn; }
    StudyOptions study_options() const {
        StudyOptions o;
        o.n_per_period = n_per_period;
        o.n_cell = n_cell;
        o.n_limit = n_limit;
        o.stations_per_piece = stations_per_piece;
        o.tol = tol;
        o.threads = threads;
        o.depth = depth;
        return o;
    }
};

inline const std::set<std::string> &known_commands() {
    static const std::set<std::string> cmds = {"cell",    "limit", "direct",   "converge",
                                               "perturb", "layer", "coeffcont"};
    return cmds;
}

namespace detail {
inline void require_descending(const std::vector<double> &v, const std::string &what) {
    if (v.empty()) throw ConfigError(what + ": ladder must be nonempty");
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1]))
            throw ConfigError(what + ": ladder must be strictly decreasing");
}
} // namespace detail

inline RunConfig parse_run_config(const nlohmann::json &j) {
    using nlohmann::json;
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    RunConfig rc;
    try {
        rc.command = j.value("command", std::string());
        if (!known_commands().count(rc.command))
            throw ConfigError("config: unknown command '" + rc.command + "'");
        if (!j.contains("geometry")) throw ConfigError("config: missing geometry");
        rc.geometry = parse_geometry(j.at("geometry"));
        rc.geometry_echo = geometry_to_json(rc.geometry);
        if (j.contains("f0")) rc.f0_echo = make_forcing(j.at("f0")).echo;
        if (j.contains("epsilons")) rc.epsilons = j.at("epsilons").get<std::vector<double>>();
        if (j.contains("deltas")) rc.deltas = j.at("deltas").get<std::vector<double>>();
        if (j.contains("etas")) rc.etas = j.at("etas").get<std::vector<double>>();
        rc.epsilon = j.value("epsilon", rc.epsilon);
        rc.x_station = j.value("x_station", rc.x_station);
        rc.n_cell = j.value("n_cell", rc.n_cell);
        rc.n_per_period = j.value("n_per_period", rc.n_per_period);
        rc.n_limit = j.value("n_limit", rc.n_limit);
        rc.stations_per_piece = j.value("stations_per_piece", rc.stations_per_piece);
        rc.tol = j.value("tol", rc.tol);
        rc.threads = j.value("threads", rc.threads);
        rc.depth = j.value("depth", rc.depth);
        rc.fhat_direct = j.value("fhat_direct", rc.fhat_direct);
        rc.mode = j.value("mode", rc.mode);
        if (j.contains("coefficients_constant")) {
            rc.coeff_r = j.at("coefficients_constant").at("r").get<std::vector<double>>();
            rc.coeff_p = j.at("coefficients_constant").at("p").get<std::vector<double>>();
        }
        if (j.contains("formats")) rc.formats = j.at("formats").get<std::vector<std::string>>();
        rc.out_dir = j.value("out", rc.out_dir);
        rc.timestamp = j.value("timestamp", rc.timestamp);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config: malformed: ") + e.what());
    }
    if (!(rc.tol > 0) || rc.tol > 1e-6) throw ConfigError("config: tol must lie in (0, 1e-6]");
    if (rc.threads < 1) throw ConfigError("config: threads must be >= 1");
    if (!(rc.epsilon > 0) || rc.epsilon > 2) throw ConfigError("config: epsilon out of range");
    if (rc.mode != "shift" && rc.mode != "amplitude")
        throw ConfigError("config: mode must be shift or amplitude");
    if (rc.command == "converge" || rc.command == "perturb")
        detail::require_descending(rc.epsilons, "epsilons");
    if (rc.command == "perturb" || rc.command == "coeffcont")
        detail::require_descending(rc.deltas, "deltas");
    if (rc.command == "layer") {
        detail::require_descending(rc.epsilons, "epsilons");
        detail::require_descending(rc.etas, "etas");
    }
    return rc;
}

//! Canonical echo; parse_run_config(config_to_json(rc)) reproduces rc.
inline nlohmann::json config_to_json(const RunConfig &rc) {
    nlohmann::json j;
    j["command"] = rc.command;
    j["geometry"] = rc.geometry_echo;
    j["f0"] = rc.f0_echo;
    j["epsilons"] = rc.epsilons;
    j["deltas"] = rc.deltas;
    j["etas"] = rc.etas;
    j["epsilon"] = rc.epsilon;
    j["x_station"] = rc.x_station;
    j["n_cell"] = rc.n_cell;
    j["n_per_period"] = rc.n_per_period;
    j["n_limit"] = rc.n_limit;
    j["stations_per_piece"] = rc.stations_per_piece;
    j["tol"] = rc.tol;
    j["threads"] = rc.threads;
    j["depth"] = rc.depth;
    j["fhat_direct"] = rc.fhat_direct;
    j["mode"] = rc.mode;
    if (!rc.coeff_r.empty())
        j["coefficients_constant"] = {{"r", rc.coeff_r}, {"p", rc.coeff_p}};
    j["formats"] = rc.formats;
    j["out"] = rc.out_dir;
    if (!rc.timestamp.empty()) j["timestamp"] = rc.timestamp;
    return j;
}

struct RunResult {
    int exit_code = 0; // 0: pass, 1: checks failed
    nlohmann::json summary;
    std::vector<std::string> files;
};

namespace detail {

inline StudyReport run_cell(const RunConfig &rc) {
    StudyReport rep;
    rep.kind = "cell";
    rep.columns = {"x", "r", "p", "q"};
    CoefficientTable table = coefficient_table(rc.geometry, rc.n_cell, rc.stations_per_piece,
                                               rc.tol, rc.threads);
    for (const auto &rows : table.piece_rows)
        for (const auto &row : rows) rep.rows.push_back({row.x, row.r, row.p, row.q});

    CellSolution at = solve_cell(rc.geometry, rc.x_station, rc.n_cell, rc.tol);
    rep.fits.emplace_back("r", at.r);
    rep.fits.emplace_back("p", at.p);
    rep.fits.emplace_back("q", at.q);
    rep.fits.emplace_back("iterations", at.stats.iterations);
    rep.check_le("q_le_one", at.q, 1.0 + 1e-8);
    rep.check_ge("q_positive", at.q, 1e-12);
    rep.check_le("corrector_zero_mean", std::abs(integrate(at.mesh, at.corrector)),
                 1e-8 * at.mesh.total_area());
    double load_sum = 0;
    for (double v : top_neumann_load(at.mesh, rc.geometry, rc.x_station)) load_sum += v;
    rep.check_le("load_compatibility", std::abs(load_sum), 1e-10);
    return rep;
}

inline CoefficientTable table_for(const RunConfig &rc) {
    if (!rc.coeff_r.empty())
        return CoefficientTable::constant(rc.coeff_r, rc.coeff_p, rc.geometry.breakpoints);
    return coefficient_table(rc.geometry, rc.n_cell, rc.stations_per_piece, rc.tol, rc.threads);
}

inline StudyReport run_limit(const RunConfig &rc) {
    StudyReport rep;
    rep.kind = "limit";
    rep.columns = {"x", "u"};
    CoefficientTable table = table_for(rc);
    auto f0 = rc.f0();
    std::function<double(double)> fhat =
        rc.fhat_direct ? f0 : hat_f_from_f0(table, f0);
    LimitSolution sol = solve_limit(table, fhat, mesh_interval(rc.n_limit, table.breakpoints));
    for (std::size_t i = 0; i < sol.mesh.nodes.size(); ++i)
        rep.rows.push_back({sol.mesh.nodes[i], sol.u[i]});
    for (std::size_t b = 1; b + 1 < table.breakpoints.size(); ++b)
        rep.fits.emplace_back("flux_jump_at_" + fmt_g(table.breakpoints[b]),
                              interface_flux_jump(sol, table, table.breakpoints[b]));
    rep.fits.emplace_back("max_abs_flux", max_abs_flux(sol, table));
    return rep;
}

inline StudyReport run_direct(const RunConfig &rc) {
    StudyReport rep;
    rep.kind = "direct";
    rep.columns = {"x", "ubar"};
    auto f0 = rc.f0();
    DirectSolution sol = solve_direct(
        rc.geometry, rc.epsilon, [&](double x, double) { return f0(x); }, rc.n_per_period,
        rc.tol);
    const double depth = rc.depth > 0 ? rc.depth : rc.geometry.g0;
    FiberAverage fa = fiber_average(sol.mesh, sol.u, depth);
    for (std::size_t j = 0; j < fa.x.size(); ++j) rep.rows.push_back({fa.x[j], fa.value[j]});
    rep.fits.emplace_back("u_l2", std::sqrt(sol.norms.l2sq));
    rep.fits.emplace_back("u_d1", std::sqrt(sol.norms.d1sq));
    rep.fits.emplace_back("u_d2_over_eps", std::sqrt(sol.norms.d2sq) / rc.epsilon);
    rep.fits.emplace_back("energy", sol.energy);
    rep.fits.emplace_back("iterations", sol.stats.iterations);
    append_solution_checks(rep, sol, "");
    return rep;
}

} // namespace detail

/*! Execute one command and write its artifacts. Throws ConfigError /
    SolverError; a clean run returns exit code 0 when every check passed,
    1 otherwise. */
inline RunResult run_command(const RunConfig &rc) {
    StudyReport rep;
    const auto f0 = rc.f0();
    if (rc.command == "cell") {
        rep = detail::run_cell(rc);
    } else if (rc.command == "limit") {
        rep = detail::run_limit(rc);
    } else if (rc.command == "direct") {
        rep = detail::run_direct(rc);
    } else if (rc.command == "converge") {
        rep = convergence_study(rc.geometry, f0, rc.epsilons, rc.study_options());
    } else if (rc.command == "perturb") {
        rep = perturbation_study(rc.geometry,
                                 rc.mode == "shift" ? PerturbMode::Shift : PerturbMode::Amplitude,
                                 rc.deltas, rc.epsilons, f0, rc.study_options());
    } else if (rc.command == "layer") {
        rep = boundary_layer_study(rc.geometry, rc.etas, rc.epsilons, f0, rc.study_options());
    } else if (rc.command == "coeffcont") {
        rep = coefficient_continuity_study(
            rc.geometry, rc.mode == "shift" ? PerturbMode::Shift : PerturbMode::Amplitude,
            rc.deltas, rc.study_options());
    } else {
        throw ConfigError("unknown command: " + rc.command);
    }
    RunResult res;
    const std::string ts = rc.timestamp.empty() ? timestamp_utc() : rc.timestamp;
    res.summary = report_to_json(rep, rc.command, ts, config_to_json(rc));
    res.files = emit_report(rc.out_dir, rc.command, ts, rep, config_to_json(rc), rc.formats);
    res.exit_code = rep.pass() ? 0 : 1;
    return res;
}

} // namespace thinhomog

#endif
