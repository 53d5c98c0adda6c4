#ifndef THINHOMOG_ANALYSIS_HPP
#define THINHOMOG_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cell.hpp"
#include "common.hpp"
#include "direct.hpp"
#include "fem.hpp"
#include "geometry.hpp"
#include "limit.hpp"
#include "meshing.hpp"

namespace thinhomog {

struct Check {
    std::string name;
    bool passed;
    double measured;
    double threshold;
};

/*! Tabular study output: parameter/values grid, fitted summaries and
    pass/fail rules. Wall time is kept out of the serialized artifacts so
    reruns stay byte-identical. */
struct StudyReport {
    std::string kind;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, double>> fits;
    std::vector<Check> checks;
    // plotdata layout: x column, y column, optional grouping column (-1: single curve)
    int plot_x = 0, plot_y = 1, plot_group = -1;

    bool pass() const {
        for (const auto &c : checks)
            if (!c.passed) return false;
        return true;
    }
    void check_le(const std::string &name, double measured, double threshold) {
        checks.push_back({name, measured <= threshold, measured, threshold});
    }
    void check_ge(const std::string &name, double measured, double threshold) {
        checks.push_back({name, measured >= threshold, measured, threshold});
    }
    std::vector<double> column(int c) const {
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto &r : rows) v.push_back(r[c]);
        return v;
    }
};

namespace tolerances {
inline constexpr double kEnergyRel = 1e-8;     // energy identity slack
inline constexpr double kAPrioriRel = 1e-8;    // a-priori bound slack
inline constexpr double kSpreadMax = 3.0;      // max/min across epsilon = "uniform"
inline constexpr double kQuarterFactor = 0.75; // layer decay when eta quarters
inline constexpr double kSlopeMin = 0.15;      // perturbation log-log slope floor
inline constexpr double kRatioBand = 0.5;      // coefficient ratio stability +-50%
} // namespace tolerances

/*! Energy identity and a-priori bounds of one thin-domain solve, appended
    as named checks. The pairing l(u) uses the assembled load, so the
    identity holds up to solver tolerance; the a-priori bounds compare
    against the quadrature-consistent norm of f. */
inline void append_solution_checks(StudyReport &rep, const DirectSolution &sol,
                                   const std::string &suffix) {
    const double V = sol.energy;
    rep.check_le("energy_identity" + suffix, std::abs(V + 0.5 * sol.load_pairing),
                 tolerances::kEnergyRel * (1.0 + std::abs(V)));
    const double F = sol.f_l2_quad * (1.0 + tolerances::kAPrioriRel) + 1e-12;
    rep.check_le("apriori_l2" + suffix, std::sqrt(sol.norms.l2sq), F);
    rep.check_le("apriori_d1" + suffix, std::sqrt(sol.norms.d1sq), F);
    rep.check_le("apriori_d2" + suffix, std::sqrt(sol.norms.d2sq) / sol.epsilon, F);
}

//! L2(0,1) distance between two piecewise-linear functions (union grid, exact).
inline double l2_diff_piecewise(const std::vector<double> &xa, const std::vector<double> &va,
                                const std::vector<double> &xb, const std::vector<double> &vb) {
    std::vector<double> xs = xa;
    xs.insert(xs.end(), xb.begin(), xb.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             xs.end());
    auto eval = [](const std::vector<double> &x, const std::vector<double> &v, double q) {
        auto it = std::upper_bound(x.begin(), x.end(), q);
        std::size_t k =
            std::min<std::size_t>(std::max<std::ptrdiff_t>(1, it - x.begin()), x.size() - 1);
        const double w = (q - x[k - 1]) / (x[k] - x[k - 1]);
        return v[k - 1] + w * (v[k] - v[k - 1]);
    };
    const double gq = 0.5 / std::sqrt(3.0);
    double s = 0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double h = xs[i + 1] - xs[i], mid = 0.5 * (xs[i] + xs[i + 1]);
        for (int g = 0; g < 2; ++g) {
            const double xq = mid + (g == 0 ? -gq : gq) * h;
            const double d = eval(xa, va, xq) - eval(xb, vb, xq);
            s += 0.5 * h * d * d;
        }
    }
    return std::sqrt(s);
}

struct StudyOptions {
    int n_per_period = 16;
    int n_cell = 64;
    int n_limit = 512;
    int stations_per_piece = 9;
    double tol = 1e-10;
    int threads = 1;
    double depth = -1; // fiber-average depth; default: certified lower bound
};

/*! Thin-domain solutions against the 1D effective limit along a descending
    epsilon ladder: e(eps) = L2 distance of the fiber average to the limit,
    plus weak-forcing consistency gaps and the per-solve energy checks. */
inline StudyReport convergence_study(const GeometrySpec &spec,
                                     const std::function<double(double)> &f0,
                                     const std::vector<double> &epsilons,
                                     const StudyOptions &opt = {}) {
    if (epsilons.empty()) throw ConfigError("convergence_study: empty epsilon ladder");
    for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (!(epsilons[i] < epsilons[i - 1]))
            throw ConfigError("convergence_study: epsilon ladder must be strictly decreasing");

    StudyReport rep;
    rep.kind = "converge";
    rep.columns = {"epsilon", "e", "fgap_max", "u_l2", "u_d1", "u_d2_over_eps", "energy",
                   "iterations"};

    CoefficientTable table =
        coefficient_table(spec, opt.n_cell, opt.stations_per_piece, opt.tol, opt.threads);
    LimitSolution limit = solve_limit(table, hat_f_from_f0(table, f0),
                                      mesh_interval(opt.n_limit, spec.breakpoints));
    const double depth = opt.depth > 0 ? opt.depth : spec.g0;

    const std::vector<std::function<double(double)>> phis = {
        [](double) { return 1.0; }, [](double x) { return std::cos(kPi * x); },
        [](double x) { return x * (1.0 - x); }};

    for (double eps : epsilons) {
        DirectSolution sol = solve_direct(
            spec, eps, [&](double x, double) { return f0(x); }, opt.n_per_period, opt.tol);
        FiberAverage fa = fiber_average(sol.mesh, sol.u, depth);
        const double e = l2_diff_piecewise(fa.x, fa.value, limit.mesh.nodes, limit.u);

        // weak gap int (G_eps - p) f0 phi dx, Gauss-2 per mesh column
        EpsilonProfile prof{&spec, eps};
        double fgap = 0;
        for (const auto &phi : phis) {
            double gap = 0;
            const double gq = 0.5 / std::sqrt(3.0);
            for (std::size_t j = 0; j + 1 < sol.mesh.fiber_x.size(); ++j) {
                const double a = sol.mesh.fiber_x[j], b = sol.mesh.fiber_x[j + 1];
                const double h = b - a, mid = 0.5 * (a + b);
                for (int g = 0; g < 2; ++g) {
                    const double x = mid + (g == 0 ? -gq : gq) * h;
                    gap += 0.5 * h * (prof.height(x) - table.eval(x).p) * f0(x) * phi(x);
                }
            }
            fgap = std::max(fgap, std::abs(gap));
        }

        rep.rows.push_back({eps, e, fgap, std::sqrt(sol.norms.l2sq), std::sqrt(sol.norms.d1sq),
                            std::sqrt(sol.norms.d2sq) / eps, sol.energy,
                            static_cast<double>(sol.stats.iterations)});
        append_solution_checks(rep, sol, "_eps" + fmt_g(eps));
    }

    const auto evals = rep.column(1);
    for (std::size_t i = 1; i < evals.size(); ++i)
        rep.check_le("e_decreasing_step" + std::to_string(i), evals[i],
                     evals[i - 1] * (1.0 - 1e-12));
    if (evals.size() >= 2)
        rep.check_le("e_last_le_half_first", evals.back(), 0.5 * evals.front());
    if (evals.size() >= 3)
        rep.fits.emplace_back("rate_e_vs_eps", loglog_slope(rep.column(0), evals));
    rep.fits.emplace_back("depth", depth);
    return rep;
}

enum class PerturbMode { Shift, Amplitude };

/*! Domain-perturbation energies over a (delta, epsilon) grid:
      D = ||u - uhat||^2 on the intersection + ||u||^2 and ||uhat||^2 on the
    one-sided slivers, all in the anisotropic norm. Checks: D shrinks with
    delta, stays epsilon-uniform (bounded spread), and decays with a minimum
    log-log slope. */
inline StudyReport perturbation_study(const GeometrySpec &spec, PerturbMode mode,
                                      const std::vector<double> &deltas,
                                      const std::vector<double> &epsilons,
                                      const std::function<double(double)> &f0,
                                      const StudyOptions &opt = {}) {
    if (deltas.empty() || epsilons.empty())
        throw ConfigError("perturbation_study: empty ladder");
    for (std::size_t i = 1; i < deltas.size(); ++i)
        if (!(deltas[i] < deltas[i - 1]))
            throw ConfigError("perturbation_study: delta ladder must be strictly decreasing");

    StudyReport rep;
    rep.kind = "perturb";
    rep.columns = {"delta", "epsilon", "D", "diff_term", "u_sliver", "uhat_sliver", "c1dist"};
    rep.plot_x = 0;
    rep.plot_y = 2;
    rep.plot_group = 1;

    auto f2 = [&](double x, double) { return f0(x); };
    for (double eps : epsilons) {
        DirectSolution sol = solve_direct(spec, eps, f2, opt.n_per_period, opt.tol);
        for (double delta : deltas) {
            const GeometrySpec hat =
                mode == PerturbMode::Shift ? shifted(spec, delta) : amplitude_scaled(spec, delta);
            DirectSolution sol_hat = solve_direct(hat, eps, f2, opt.n_per_period, opt.tol);
            const double dist = c1_distance(spec, hat);

            const auto &h = sol.mesh.col_height;
            const auto &hh = sol_hat.mesh.col_height;
            std::vector<double> hmin(h.size());
            for (std::size_t j = 0; j < h.size(); ++j) hmin[j] = std::min(h[j], hh[j]);

            FieldP1 uhat_on = transfer_field(sol_hat.mesh, sol_hat.u, sol.mesh, 1.0, true);
            const FieldP1 diff = subtract(sol.u, uhat_on);
            const double t_diff =
                norm_parts_clipped(sol.mesh, diff, hmin, /*above=*/false).h1_eps_sq(eps);
            const double t_u = norm_parts_clipped(sol.mesh, sol.u, hh, /*above=*/true).h1_eps_sq(eps);
            const double t_hat =
                norm_parts_clipped(sol_hat.mesh, sol_hat.u, h, /*above=*/true).h1_eps_sq(eps);
            rep.rows.push_back({delta, eps, t_diff + t_u + t_hat, t_diff, t_u, t_hat, dist});
        }
    }

    // D decreasing in delta for each epsilon
    for (std::size_t ei = 0; ei < epsilons.size(); ++ei) {
        for (std::size_t di = 1; di < deltas.size(); ++di) {
            const double prev = rep.rows[ei * deltas.size() + di - 1][2];
            const double cur = rep.rows[ei * deltas.size() + di][2];
            rep.check_le("D_decreasing_eps" + fmt_g(epsilons[ei]) + "_step" + std::to_string(di),
                         cur, prev * (1.0 - 1e-12));
        }
    }
    // epsilon-uniformity per delta, and the slope of the epsilon-max envelope
    std::vector<double> dmax(deltas.size(), 0.0);
    for (std::size_t di = 0; di < deltas.size(); ++di) {
        double mx = 0, mn = std::numeric_limits<double>::infinity();
        for (std::size_t ei = 0; ei < epsilons.size(); ++ei) {
            const double v = rep.rows[ei * deltas.size() + di][2];
            mx = std::max(mx, v);
            mn = std::min(mn, v);
        }
        dmax[di] = mx;
        rep.check_le("spread_delta" + fmt_g(deltas[di]), mx / std::max(mn, 1e-300),
                     tolerances::kSpreadMax);
    }
    if (deltas.size() >= 3) {
        const double slope = loglog_slope(deltas, dmax);
        rep.fits.emplace_back("slope_Dmax_vs_delta", slope);
        rep.check_ge("slope_ge_min", slope, tolerances::kSlopeMin);
    }
    return rep;
}

/*! Boundary-layer energies over an (eta, epsilon) grid:
      T = ||u||^2 above the shrunken graph + ||Pu||^2 over the stretched
          sliver + ||u - Pu||^2 over the whole domain,
    P the vertical stretch by (1+eta). Checks: decay in eta (factor 0.75 per
    quartering) and epsilon-uniformity. */
inline StudyReport boundary_layer_study(const GeometrySpec &spec, const std::vector<double> &etas,
                                        const std::vector<double> &epsilons,
                                        const std::function<double(double)> &f0,
                                        const StudyOptions &opt = {}) {
    if (etas.empty() || epsilons.empty()) throw ConfigError("boundary_layer_study: empty ladder");
    for (std::size_t i = 1; i < etas.size(); ++i)
        if (!(etas[i] < etas[i - 1]))
            throw ConfigError("boundary_layer_study: eta ladder must be strictly decreasing");

    StudyReport rep;
    rep.kind = "layer";
    rep.columns = {"eta", "epsilon", "T", "strip_term", "stretch_term", "diff_term"};
    rep.plot_x = 0;
    rep.plot_y = 2;
    rep.plot_group = 1;

    for (double eps : epsilons) {
        DirectSolution sol = solve_direct(
            spec, eps, [&](double x, double) { return f0(x); }, opt.n_per_period, opt.tol);
        const auto &h = sol.mesh.col_height;
        for (double eta : etas) {
            std::vector<double> shrunk(h.size());
            for (std::size_t j = 0; j < h.size(); ++j) shrunk[j] = h[j] / (1.0 + eta);
            const double t_strip =
                norm_parts_clipped(sol.mesh, sol.u, shrunk, /*above=*/true).h1_eps_sq(eps);

            RescaledField stretched = vertical_scale(sol, eta);
            const double t_stretch = h1_eps_scaled_sq(
                norm_parts_clipped(stretched.mesh, stretched.u, h, /*above=*/true), eps, eta);

            FieldP1 pu = transfer_field(sol.mesh, sol.u, sol.mesh, 1.0 / (1.0 + eta), false);
            const double t_diff = h1_eps_norm_sq(sol.mesh, subtract(sol.u, pu), eps);
            rep.rows.push_back({eta, eps, t_strip + t_stretch + t_diff, t_strip, t_stretch, t_diff});
        }
    }

    const std::size_t ne = etas.size();
    for (std::size_t ei = 0; ei < epsilons.size(); ++ei) {
        for (std::size_t k = 1; k < ne; ++k) {
            const double prev = rep.rows[ei * ne + k - 1][2];
            const double cur = rep.rows[ei * ne + k][2];
            rep.check_le("T_decreasing_eps" + fmt_g(epsilons[ei]) + "_step" + std::to_string(k),
                         cur, prev * (1.0 - 1e-12));
            // quartering eta must at least shed a fixed factor
            if (std::abs(etas[k - 1] / etas[k] - 4.0) < 1e-9)
                rep.check_le("T_quarter_eps" + fmt_g(epsilons[ei]) + "_step" + std::to_string(k),
                             cur, tolerances::kQuarterFactor * prev);
        }
    }
    for (std::size_t k = 0; k < ne; ++k) {
        double mx = 0, mn = std::numeric_limits<double>::infinity();
        for (std::size_t ei = 0; ei < epsilons.size(); ++ei) {
            const double v = rep.rows[ei * ne + k][2];
            mx = std::max(mx, v);
            mn = std::min(mn, v);
        }
        rep.check_le("spread_eta" + fmt_g(etas[k]), mx / std::max(mn, 1e-300),
                     tolerances::kSpreadMax);
    }
    if (ne >= 3) {
        std::vector<double> tmax(ne, 0.0);
        for (std::size_t k = 0; k < ne; ++k)
            for (std::size_t ei = 0; ei < epsilons.size(); ++ei)
                tmax[k] = std::max(tmax[k], rep.rows[ei * ne + k][2]);
        rep.fits.emplace_back("slope_Tmax_vs_eta", loglog_slope(etas, tmax));
    }
    return rep;
}

/*! Effective-coefficient continuity in the geometry: perturb the profile
    along a delta ladder and track |r - rhat| (and |q - qhat|) against the
    sampled C1 distance. The ratio must stay within +-50% of its ladder
    mean; flat-to-flat shifts give ratio exactly 1. */
inline StudyReport coefficient_continuity_study(const GeometrySpec &spec, PerturbMode mode,
                                                const std::vector<double> &deltas,
                                                const StudyOptions &opt = {}) {
    if (deltas.empty()) throw ConfigError("coefficient_continuity_study: empty ladder");
    StudyReport rep;
    rep.kind = "coeffcont";
    rep.columns = {"delta", "c1dist", "dr", "dq", "ratio", "backend_gap"};
    rep.plot_x = 1;
    rep.plot_y = 2;

    const double x0 = 0.5 * (spec.breakpoints.front() + spec.breakpoints.back());
    CellSolution base = solve_cell(spec, x0, opt.n_cell, opt.tol);
    std::vector<double> ratios;
    for (double delta : deltas) {
        const GeometrySpec hat =
            mode == PerturbMode::Shift ? shifted(spec, delta) : amplitude_scaled(spec, delta);
        const double dist = c1_distance(spec, hat);
        CellSolution direct = solve_cell(hat, x0, opt.n_cell, opt.tol);
        CellSolution mapped = solve_cell_mapped(spec, hat, x0, opt.n_cell, opt.tol);
        const double dr = std::abs(direct.r - base.r);
        const double dq = std::abs(direct.q - base.q);
        const double ratio = dr / dist;
        ratios.push_back(ratio);
        rep.rows.push_back({delta, dist, dr, dq, ratio, std::abs(mapped.q - direct.q)});
    }
    double mean = 0;
    for (double v : ratios) mean += v;
    mean /= static_cast<double>(ratios.size());
    rep.fits.emplace_back("ratio_mean", mean);
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        rep.check_le("ratio_hi_delta" + fmt_g(deltas[i]), ratios[i],
                     (1.0 + tolerances::kRatioBand) * mean);
        rep.check_ge("ratio_lo_delta" + fmt_g(deltas[i]), ratios[i],
                     (1.0 - tolerances::kRatioBand) * mean);
    }
    return rep;
}

} // namespace thinhomog

#endif
