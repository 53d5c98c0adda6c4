#ifndef THINHOMOG_CELL_HPP
#define THINHOMOG_CELL_HPP

#include <cmath>
#include <sstream>
#include <vector>

#include "common.hpp"
#include "fem.hpp"
#include "geometry.hpp"
#include "meshing.hpp"

namespace thinhomog {

/*! Corrector problem on one periodicity cell plus the effective
    coefficients it induces:
      r = (1/L) int_cell (1 - d corrector / dy1),  p = |cell| / L,  q = r/p.
    q = 1 exactly when the top is flat (zero boundary load); oscillation
    makes q strictly smaller. */
struct CellSolution {
    TriMesh mesh;
    FieldP1 corrector;
    double x_station = 0;
    double r = 0, p = 0, q = 0;
    SolveStats stats;
};

struct EffectiveCoefficients {
    double r, p, q;
};

//! Recompute (r, p, q) from a stored corrector; idempotent.
inline EffectiveCoefficients effective_coefficients(const TriMesh &mesh, const FieldP1 &corrector,
                                                    double L) {
    double flux = 0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto g = mesh.shape_gradients(t);
        const auto &tr = mesh.tris[t];
        double gx = 0;
        for (int i = 0; i < 3; ++i) gx += corrector.at(tr[i]) * g[i][0];
        flux += mesh.tri_area(t) * gx;
    }
    const double area = mesh.total_area();
    const double r = (area - flux) / L;
    const double p = area / L;
    return {r, p, r / p};
}

/*! Solve the cell problem at frozen slow coordinate x: Laplace with the
    oscillating-top Neumann datum, periodic lateral identification, zero
    mean. */
inline CellSolution solve_cell(const GeometrySpec &spec, double x, int n, double tol = 1e-10,
                               Side side = Side::Left) {
    CellSolution sol;
    sol.mesh = mesh_cell(spec, x, n, side);
    sol.x_station = x;
    Assembled sys = assemble_operator(sol.mesh, 1.0, 1.0, 0.0);
    add_load_vector(sys, top_neumann_load(sol.mesh, spec, x, side));
    ConstrainedSystem cs = constrain(sys, sol.mesh, /*periodic=*/true, /*zero_mean=*/true);
    auto [field, stats] = solve(cs, tol);
    sol.corrector = std::move(field);
    sol.stats = stats;
    const auto eff = effective_coefficients(sol.mesh, sol.corrector, spec.L);
    sol.r = eff.r;
    sol.p = eff.p;
    sol.q = eff.q;
    return sol;
}

/*! Mapped backend: solve the cell problem of a perturbed geometry ghat on
    the mesh of the base geometry g, via the vertical stretch
    (z1, z2) -> (z1, F(z1) z2) with F = ghat/g. The transported operator has
    the symmetric coefficient matrix
      [[F, -F' z2], [-F' z2, (1 + (F' z2)^2) / F]]
    and the top load uses ghat's datum on the base top curve. Coefficients
    are recovered by pulling the target integrals back to the base cell. */
inline CellSolution solve_cell_mapped(const GeometrySpec &base, const GeometrySpec &target,
                                      double x, int n, double tol = 1e-10,
                                      Side side = Side::Left) {
    CellSolution sol;
    sol.mesh = mesh_cell(base, x, n, side);
    sol.x_station = x;
    auto F = [&](double y1) {
        return target.eval(x, y1, side).g / base.eval(x, y1, side).g;
    };
    auto Fp = [&](double y1) {
        const GeomValue b = base.eval(x, y1, side), t = target.eval(x, y1, side);
        return (t.gy * b.g - t.g * b.gy) / (b.g * b.g);
    };
    auto Amat = [&](double y1, double y2) -> std::array<double, 3> {
        const double f = F(y1), fp = Fp(y1);
        return {f, -fp * y2, (1.0 + fp * fp * y2 * y2) / f};
    };
    Assembled sys = assemble_operator_variable(sol.mesh, Amat, 0.0);
    add_load_vector(sys, top_neumann_load(sol.mesh, target, x, side));
    ConstrainedSystem cs = constrain(sys, sol.mesh, /*periodic=*/true, /*zero_mean=*/true);
    auto [field, stats] = solve(cs, tol);
    sol.corrector = std::move(field);
    sol.stats = stats;

    // r(ghat) = (1/L) int_base (1 - W_1 + (F' z2 / F) W_2) F dz, p = (1/L) int_base F dz
    double rsum = 0, psum = 0;
    for (int t = 0; t < sol.mesh.n_triangles(); ++t) {
        const auto g = sol.mesh.shape_gradients(t);
        const auto &tr = sol.mesh.tris[t];
        double w1 = 0, w2 = 0;
        for (int i = 0; i < 3; ++i) {
            w1 += sol.corrector.at(tr[i]) * g[i][0];
            w2 += sol.corrector.at(tr[i]) * g[i][1];
        }
        const double w = sol.mesh.tri_area(t) / 3.0;
        const auto mids = detail::edge_midpoints(sol.mesh, t);
        for (const auto &mp : mids) {
            const double f = F(mp[0]), fp = Fp(mp[0]);
            rsum += w * f * (1.0 - w1 + fp * mp[1] / f * w2);
            psum += w * f;
        }
    }
    sol.r = rsum / base.L;
    sol.p = psum / base.L;
    sol.q = sol.r / sol.p;
    return sol;
}

/*! Effective coefficients sampled along x: per-piece station lists with
    one-sided endpoint values. x-independent pieces are detected and solved
    once. */
struct CoefficientRow {
    double x;
    double r, p, q;
};

struct CoefficientTable {
    std::vector<double> breakpoints;
    std::vector<std::vector<CoefficientRow>> piece_rows; // >= 2 rows per piece
    std::vector<bool> piece_constant;

    //! Synthetic table with piecewise-constant coefficients (tests, manufactured runs).
    static CoefficientTable constant(const std::vector<double> &r, const std::vector<double> &p,
                                     std::vector<double> breakpoints = {0.0, 1.0}) {
        if (r.size() != p.size() || r.size() + 1 != breakpoints.size())
            throw ConfigError("coefficient table: size mismatch");
        CoefficientTable t;
        t.breakpoints = std::move(breakpoints);
        for (std::size_t i = 0; i < r.size(); ++i) {
            t.piece_rows.push_back({{t.breakpoints[i], r[i], p[i], r[i] / p[i]},
                                    {t.breakpoints[i + 1], r[i], p[i], r[i] / p[i]}});
            t.piece_constant.push_back(true);
        }
        return t;
    }

    std::size_t piece_of(double x, Side side) const {
        const double tol = 1e-12;
        if (x < -tol || x > 1 + tol) throw ConfigError("coefficient table: x outside [0,1]");
        x = std::clamp(x, 0.0, 1.0);
        if (side == Side::Left) {
            auto it = std::lower_bound(breakpoints.begin() + 1, breakpoints.end(), x);
            return static_cast<std::size_t>(it - breakpoints.begin()) - 1;
        }
        auto it = std::upper_bound(breakpoints.begin(), breakpoints.end() - 1, x);
        return static_cast<std::size_t>(it - breakpoints.begin()) - 1;
    }

    CoefficientRow eval(double x, Side side = Side::Left) const {
        const auto &rows = piece_rows[piece_of(x, side)];
        if (rows.size() == 1) return CoefficientRow{x, rows[0].r, rows[0].p, rows[0].q};
        auto it = std::lower_bound(rows.begin(), rows.end(), x,
                                   [](const CoefficientRow &r, double v) { return r.x < v; });
        if (it == rows.begin()) ++it;
        if (it == rows.end()) --it;
        const CoefficientRow &b = *it, &a = *(it - 1);
        const double w = (x - a.x) / (b.x - a.x);
        return CoefficientRow{x, a.r + w * (b.r - a.r), a.p + w * (b.p - a.p),
                              a.q + w * (b.q - a.q)};
    }
};

inline CoefficientTable coefficient_table(const GeometrySpec &spec, int n_cell,
                                          int stations_per_piece = 9, double tol = 1e-10,
                                          int threads = 1) {
    if (stations_per_piece < 2)
        throw ConfigError("coefficient_table: need >= 2 stations per piece");
    CoefficientTable table;
    table.breakpoints = spec.breakpoints;
    table.piece_rows.resize(spec.pieces.size());
    table.piece_constant.resize(spec.pieces.size());

    struct Job {
        std::size_t piece;
        double x;
        Side side;
        std::size_t slot;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < spec.pieces.size(); ++i) {
        const double x0 = spec.breakpoints[i], x1 = spec.breakpoints[i + 1];
        const bool constant = spec.piece_x_independent(i);
        table.piece_constant[i] = constant;
        if (constant) {
            table.piece_rows[i].resize(2);
            jobs.push_back({i, 0.5 * (x0 + x1), Side::Left, 0});
        } else {
            const int ns = stations_per_piece;
            table.piece_rows[i].resize(ns);
            for (int s = 0; s < ns; ++s) {
                const double x = x0 + (x1 - x0) * s / (ns - 1);
                const Side side = (s == 0) ? Side::Right : Side::Left;
                jobs.push_back({i, x, side, static_cast<std::size_t>(s)});
            }
        }
    }
    std::vector<CoefficientRow> results(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t k) {
        const Job &jb = jobs[k];
        CellSolution cs = solve_cell(spec, jb.x, n_cell, tol, jb.side);
        results[k] = {jb.x, cs.r, cs.p, cs.q};
    });
    std::size_t k = 0;
    for (std::size_t i = 0; i < spec.pieces.size(); ++i) {
        if (table.piece_constant[i]) {
            CoefficientRow row = results[k++];
            row.x = spec.breakpoints[i];
            table.piece_rows[i][0] = row;
            row.x = spec.breakpoints[i + 1];
            table.piece_rows[i][1] = row;
        } else {
            for (std::size_t s = 0; s < table.piece_rows[i].size(); ++s)
                table.piece_rows[i][s] = results[k++];
        }
    }
    return table;
}

//! CSV dump: header comment, then x,r,p,q rows; breakpoints appear once per side.
inline std::string coefficient_table_csv(const CoefficientTable &table) {
    std::ostringstream os;
    os << "# effective coefficients per station: r (flux weight), p (mean height), q = r/p\n";
    os << "x,r,p,q\n";
    for (const auto &rows : table.piece_rows)
        for (const auto &row : rows)
            os << fmt_g(row.x) << ',' << fmt_g(row.r) << ',' << fmt_g(row.p) << ','
               << fmt_g(row.q) << '\n';
    return os.str();
}

} // namespace thinhomog

#endif
