/*! Acceptance gate: one pass/fail line per numbered criterion, exit 0 only
    when every criterion holds. Tolerances are pinned here on purpose; edit
    them only together with the quantity they certify. */

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "thinhomog/analysis.hpp"
#include "thinhomog/cli.hpp"

using namespace thinhomog;

namespace {

struct Gate {
    int total = 0;
    int passed = 0;

    /*! Run one criterion body; the body returns a detail string and throws
        (or calls fail()) on violation. */
    void run(int id, const std::string &title, const std::function<std::string()> &body) {
        ++total;
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = body();
        } catch (const std::exception &e) {
            ok = false;
            detail = e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (ok) ++passed;
        std::printf("[%s] %02d %-34s (%6.1f s) %s\n", ok ? "PASS" : "FAIL", id, title.c_str(),
                    secs, detail.c_str());
        std::fflush(stdout);
    }
};

struct CriterionFailure : std::runtime_error {
    explicit CriterionFailure(const std::string &m) : std::runtime_error(m) {}
};

void require(bool cond, const std::string &what) {
    if (!cond) throw CriterionFailure(what);
}

std::string fmt(const char *pattern, double a, double b = 0, double c = 0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

double max_abs(const std::vector<double> &v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::string slurp(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// ---- shared fixtures ------------------------------------------------------

GeometrySpec oscillating() { return GeometrySpec::sinusoid(2.0, 1.0); }

const double kQBar = 0.5808411; // Richardson limit of q(n) for the 2+sin profile

double forcing_cos(double x) { return std::cos(kPi * x); }

//! L2 error of the manufactured constant-coefficient limit solve at mesh size n.
double manufactured_error(int n) {
    const CoefficientTable table = CoefficientTable::constant({kQBar}, {1.0});
    const auto fhat = [](double x) { return (kQBar * kPi * kPi + 1.0) * std::cos(kPi * x); };
    const LimitSolution sol = solve_limit(table, fhat, n);
    return l2_error(sol, [](double x) { return std::cos(kPi * x); });
}

// studies reused across criteria (5 feeds 7)
std::optional<StudyReport> g_converge_osc;
std::optional<StudyReport> g_converge_flat;

// ---- criteria -------------------------------------------------------------

std::string crit_flat_cells() {
    double worst_q = 0, worst_rp = 0, worst_x = 0;
    for (double c : {1.0, 2.0, 3.7}) {
        const CellSolution s = solve_cell(GeometrySpec::constant(c), 0.5, 64);
        worst_q = std::max(worst_q, std::abs(s.q - 1.0));
        worst_rp = std::max({worst_rp, std::abs(s.r - c), std::abs(s.p - c)});
        worst_x = std::max(worst_x, max_abs(s.corrector.coeffs));
    }
    require(worst_q <= 1e-8, fmt("|q-1| = %.3g > 1e-8", worst_q));
    require(worst_x <= 1e-8, fmt("max corrector = %.3g > 1e-8", worst_x));
    require(worst_rp <= 1e-10, fmt("|r-c| or |p-c| = %.3g > 1e-10", worst_rp));
    return fmt("|q-1| <= %.2g, |r-c|,|p-c| <= %.2g", worst_q, worst_rp);
}

std::string crit_cell_ladder() {
    const std::vector<int> ns{32, 64, 128, 256};
    std::vector<double> q;
    for (int n : ns) q.push_back(solve_cell(oscillating(), 0.5, n).q);
    std::vector<double> inc;
    for (std::size_t i = 1; i < q.size(); ++i) inc.push_back(std::abs(q[i] - q[i - 1]));
    for (std::size_t i = 1; i < inc.size(); ++i)
        require(inc[i] < inc[i - 1], fmt("increment grew: %.3g -> %.3g", inc[i - 1], inc[i]));
    const double order = std::log2(inc[inc.size() - 2] / inc.back());
    require(order >= 1.6 && order <= 2.4, fmt("observed order %.3f outside [1.6, 2.4]", order));
    require(std::abs(q[2] - kQBar) <= 1e-3,
            fmt("q(128) = %.7f vs extrapolated %.7f", q[2], kQBar));
    require(q[3] > 0.0 && q[3] < 1.0, fmt("q(256) = %.7f outside (0,1)", q[3]));
    return fmt("order %.2f, q(128)-qbar = %.2e", order, q[2] - kQBar);
}

std::string crit_mapped_backend() {
    const GeometrySpec base = oscillating();
    const std::vector<GeometrySpec> targets{amplitude_scaled(base, 0.05),
                                            amplitude_scaled(base, -0.05), shifted(base, 0.3)};
    double worst = 0;
    for (const auto &t : targets) {
        const double dist = c1_distance(base, t);
        require(dist <= 0.5, fmt("pair too far apart in C1: %.3f", dist));
        const double qd = solve_cell(t, 0.5, 128).q;
        const double qm = solve_cell_mapped(base, t, 0.5, 128).q;
        worst = std::max(worst, std::abs(qm - qd));
    }
    require(worst <= 5e-3, fmt("backend gap %.3g > 5e-3", worst));
    return fmt("max backend gap %.2e over 3 pairs", worst);
}

std::string crit_manufactured_limit() {
    const std::vector<int> ns{32, 64, 128, 256};
    std::vector<double> h, err;
    for (int n : ns) {
        h.push_back(1.0 / n);
        err.push_back(manufactured_error(n));
    }
    const double slope = loglog_slope(h, err);
    require(slope >= 1.8 && slope <= 2.2, fmt("L2 order %.3f outside 2 +- 0.2", slope));
    return fmt("L2 order %.3f, err(1/256) = %.2e", slope, err.back());
}

std::string crit_homogenization_convergence() {
    StudyOptions opt;
    opt.n_per_period = 16;
    opt.n_cell = 64;
    opt.n_limit = 512;
    const std::vector<double> eps{0.25, 0.125, 0.0625, 0.03125};
    g_converge_osc = convergence_study(oscillating(), forcing_cos, eps, opt);
    const StudyReport &rep = *g_converge_osc;
    for (const auto &c : rep.checks)
        if (c.name.rfind("e_", 0) == 0)
            require(c.passed, c.name + fmt(": %.3g vs %.3g", c.measured, c.threshold));

    // control: a flat top must sit at discretization level, i.e. comparable
    // to the manufactured limit error at the matched horizontal resolution
    g_converge_flat = convergence_study(GeometrySpec::constant(2.0), forcing_cos, eps, opt);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double e_flat = g_converge_flat->rows[i][1];
        const double matched = manufactured_error(static_cast<int>(std::lround(16.0 / eps[i])));
        require(e_flat <= 10.0 * matched,
                fmt("flat control %.3g > 10 x %.3g at eps %.4f", e_flat, matched, eps[i]));
    }
    const double e0 = rep.rows.front()[1], e3 = rep.rows.back()[1];
    return fmt("e: %.3e -> %.3e over 4 epsilons", e0, e3);
}

std::string crit_interface_conditions() {
    const GeometrySpec spec = GeometrySpec::piecewise_flat({1.0, 2.0}, {0.0, 0.5, 1.0});
    const CoefficientTable table = coefficient_table(spec, 16, 3);
    const auto fhat = [](double) { return 1.0; };
    std::vector<double> jumps;
    double flux_scale = 0;
    for (int n : {64, 128, 256}) {
        const LimitSolution sol = solve_limit(table, fhat, mesh_interval(n, table.breakpoints));
        jumps.push_back(std::abs(interface_flux_jump(sol, table, 0.5)));
        flux_scale = max_abs_flux(sol, table);
    }
    // flat pieces give r = p exactly, and then the discrete jump is already
    // at rounding level on every mesh; "decreasing" is read as decreasing
    // until the rounding floor is reached
    const double floor_jump = 1e-12 * std::max(1.0, flux_scale);
    for (std::size_t i = 1; i < jumps.size(); ++i)
        require(jumps[i] < jumps[i - 1] || jumps[i] <= floor_jump,
                fmt("jump grew above rounding floor: %.3g -> %.3g", jumps[i - 1], jumps[i]));
    require(jumps[2] <= 1e-2 * flux_scale,
            fmt("jump %.3g > 1e-2 x max flux %.3g", jumps[2], flux_scale));

    // independent flux weights make the jump a genuine O(h) quantity; the
    // refinement decay is demonstrated there
    const CoefficientTable mixed =
        CoefficientTable::constant({1.0, 3.0}, {1.0, 2.0}, {0.0, 0.5, 1.0});
    std::vector<double> mj;
    double mscale = 0;
    for (int n : {64, 128, 256}) {
        const LimitSolution sol = solve_limit(mixed, fhat, mesh_interval(n, mixed.breakpoints));
        mj.push_back(std::abs(interface_flux_jump(sol, mixed, 0.5)));
        mscale = max_abs_flux(sol, mixed);
    }
    require(mj[0] > 1e-6 && mj[1] < mj[0] && mj[2] < mj[1],
            fmt("probe jump not decreasing: %.3g, %.3g, %.3g", mj[0], mj[1], mj[2]));
    require(mj[2] <= 1e-2 * mscale, fmt("probe jump %.3g > 1e-2 x %.3g", mj[2], mscale));
    return fmt("jump %.2e (floor), probe decays to %.2e", jumps[2], mj[2]);
}

std::string crit_energy_identities() {
    require(g_converge_osc.has_value() && g_converge_flat.has_value(),
            "prerequisite convergence study did not run");
    int seen = 0;
    for (const StudyReport *rep : {&*g_converge_osc, &*g_converge_flat}) {
        for (const auto &c : rep->checks) {
            const bool relevant =
                c.name.rfind("energy_identity", 0) == 0 || c.name.rfind("apriori_", 0) == 0;
            if (!relevant) continue;
            ++seen;
            require(c.passed, c.name + fmt(": %.3g vs %.3g", c.measured, c.threshold));
        }
    }
    require(seen == 32, fmt("expected 32 per-solve checks, saw %g", seen));
    return "energy + 3 a priori bounds hold on all 8 solves";
}

std::string crit_perturbation_uniformity() {
    StudyOptions opt; // defaults: n_per_period 16, n_cell 64, n_limit 512
    const StudyReport rep =
        perturbation_study(oscillating(), PerturbMode::Shift, {0.1, 0.05, 0.025},
                           {0.125, 0.0625, 0.03125}, forcing_cos, opt);
    for (const auto &c : rep.checks)
        require(c.passed, c.name + fmt(": %.3g vs %.3g", c.measured, c.threshold));
    double slope = 0;
    for (const auto &[k, v] : rep.fits)
        if (k == "slope_Dmax_vs_delta") slope = v;
    return fmt("D monotone, spread <= 3, slope %.2f >= 0.15", slope);
}

std::string crit_boundary_layer() {
    StudyOptions opt;
    const StudyReport rep = boundary_layer_study(oscillating(), {0.4, 0.1, 0.025},
                                                 {0.125, 0.0625}, forcing_cos, opt);
    for (const auto &c : rep.checks)
        require(c.passed, c.name + fmt(": %.3g vs %.3g", c.measured, c.threshold));
    const double t_first = rep.rows.front()[2], t_last = rep.rows.back()[2];
    return fmt("T: %.3e -> %.3e, quartering sheds >= 25%%", t_first, t_last);
}

std::string crit_coefficient_continuity() {
    StudyOptions opt;
    opt.n_cell = 64;
    const StudyReport rep = coefficient_continuity_study(oscillating(), PerturbMode::Amplitude,
                                                         {0.1, 0.05, 0.025}, opt);
    for (const auto &c : rep.checks)
        require(c.passed, c.name + fmt(": %.3g vs %.3g", c.measured, c.threshold));

    StudyOptions flat_opt;
    flat_opt.n_cell = 8;
    const StudyReport flat = coefficient_continuity_study(
        GeometrySpec::constant(1.0), PerturbMode::Shift, {0.1, 0.05, 0.025}, flat_opt);
    for (const auto &row : flat.rows)
        require(std::abs(row[4] - 1.0) <= 1e-9,
                fmt("flat shift ratio %.12f != 1 at delta %.3f", row[4], row[0]));
    double mean = 0;
    for (const auto &[k, v] : rep.fits)
        if (k == "ratio_mean") mean = v;
    return fmt("amplitude ratio stable around %.3f; flat ratio = 1", mean);
}

std::string crit_determinism() {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "thinhomog_acceptance";
    const fs::path a = base / "a", b = base / "b";
    fs::remove_all(base);
    fs::create_directories(a);
    fs::create_directories(b);
    nlohmann::json cfg{{"command", "coeffcont"},
                       {"geometry", {{"pieces", {{{"a", {1.0}}}}}}},
                       {"deltas", {0.1, 0.05}},
                       {"n_cell", 8},
                       {"formats", {"csv", "json"}},
                       {"timestamp", "20260101T000000Z"}};
    nlohmann::json ca = cfg, cb = cfg;
    ca["out"] = a.string();
    cb["out"] = b.string();
    const RunResult ra = run_command(parse_run_config(ca));
    const RunResult rb = run_command(parse_run_config(cb));
    require(ra.exit_code == 0 && rb.exit_code == 0, "study run failed its own checks");
    require(ra.files.size() == rb.files.size() && ra.files.size() == 2,
            "expected a json and a csv artifact per run");
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
        const std::string xa = slurp(ra.files[i]), xb = slurp(rb.files[i]);
        require(!xa.empty(), "empty artifact " + ra.files[i]);
        require(xa == xb, "artifacts differ: " + ra.files[i] + " vs " + rb.files[i]);
    }
    fs::remove_all(base);
    return "rerun with fixed timestamp is byte-identical (json, csv)";
}

} // namespace

int main() {
    Gate gate;
    gate.run(1, "flat cells solve exactly", crit_flat_cells);
    gate.run(2, "cell coefficient ladder converges", crit_cell_ladder);
    gate.run(3, "mapped and direct backends agree", crit_mapped_backend);
    gate.run(4, "manufactured limit has order 2", crit_manufactured_limit);
    gate.run(5, "thin-domain averages reach the limit", crit_homogenization_convergence);
    gate.run(6, "interface flux is conserved", crit_interface_conditions);
    gate.run(7, "energy and a priori bounds hold", crit_energy_identities);
    gate.run(8, "perturbation distance is uniform", crit_perturbation_uniformity);
    gate.run(9, "boundary-layer terms decay", crit_boundary_layer);
    gate.run(10, "coefficients are C1-stable", crit_coefficient_continuity);
    gate.run(11, "artifacts are deterministic", crit_determinism);
    std::printf("acceptance: %d/%d criteria passed\n", gate.passed, gate.total);
    return gate.passed == gate.total ? 0 : 1;
}
