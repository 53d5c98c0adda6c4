#ifndef THINHOMOG_DIRECT_HPP
#define THINHOMOG_DIRECT_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "common.hpp"
#include "fem.hpp"
#include "geometry.hpp"
#include "meshing.hpp"

namespace thinhomog {

/*! Solution of the rescaled thin-domain problem
      int du dv (x1) + (1/eps^2) du dv (x2) + u v = int f v
    on {0 < x2 < G(x1, x1/eps)} with natural boundary conditions, plus the
    diagnostics needed for the energy and a-priori checks. */
struct DirectSolution {
    GeometrySpec spec;
    double epsilon = 0;
    TriMesh mesh;
    FieldP1 u;
    SolveStats stats;
    NormParts norms;     // components of u: L2, x1-derivative, x2-derivative
    double energy = 0;       // (1/2) a(u,u) - l(u)
    double load_pairing = 0; // l(u)
    double f_l2_quad = 0;    // quadrature-consistent ||f||_L2 over the mesh
};

inline DirectSolution solve_direct(const GeometrySpec &spec, double epsilon,
                                   const std::function<double(double, double)> &f,
                                   int n_per_period = 16, double tol = 1e-10) {
    DirectSolution sol;
    sol.spec = spec;
    sol.epsilon = epsilon;
    sol.mesh = mesh_domain(spec, epsilon, n_per_period);
    Assembled sys = assemble_operator(sol.mesh, 1.0, 1.0 / (epsilon * epsilon), 1.0);
    add_load_function(sys, sol.mesh, f);
    ConstrainedSystem cs = constrain(sys, sol.mesh, /*periodic=*/false, /*zero_mean=*/false);
    auto [field, stats] = solve(cs, tol);
    sol.u = std::move(field);
    sol.stats = stats;
    sol.norms = norm_parts(sol.mesh, sol.u);

    std::vector<double> Ax(cs.matrix.n);
    cs.matrix.matvec(sol.u.coeffs, Ax);
    const double a_uu = detail::dot(sol.u.coeffs, Ax);
    sol.load_pairing = detail::dot(cs.rhs, sol.u.coeffs);
    sol.energy = 0.5 * a_uu - sol.load_pairing;
    sol.f_l2_quad = std::sqrt(l2sq_quadrature(sol.mesh, f));
    return sol;
}

namespace detail {
//! Piecewise-linear evaluation along a mesh fiber (uniform spacing, top on the graph).
inline double fiber_eval(const TriMesh &mesh, const FieldP1 &u, std::size_t col, double y) {
    const auto &fib = mesh.fibers[col];
    const int m = static_cast<int>(fib.size()) - 1;
    const double h = mesh.col_height[col];
    double t = y / (h / m);
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, m - 1);
    const double s = std::clamp(t - i, 0.0, 1.0);
    return (1 - s) * u.at(fib[i]) + s * u.at(fib[i + 1]);
}
inline void require_same_stations(const TriMesh &a, const TriMesh &b) {
    if (a.fiber_x.size() != b.fiber_x.size())
        throw std::invalid_argument("field transfer: meshes have different stations");
    for (std::size_t j = 0; j < a.fiber_x.size(); ++j)
        if (std::abs(a.fiber_x[j] - b.fiber_x[j]) > 1e-12)
            throw std::invalid_argument("field transfer: meshes have different stations");
}
} // namespace detail

/*! Transfer a field between graph meshes sharing the same stations:
    dst vertex (x, y) takes the source fiber value at y * y_scale.
    clamp_top caps the evaluation at the source column height (used when the
    destination domain sticks out above the source domain). */
inline FieldP1 transfer_field(const TriMesh &src, const FieldP1 &u, const TriMesh &dst,
                              double y_scale = 1.0, bool clamp_top = false) {
    detail::require_same_stations(src, dst);
    std::vector<double> vals(dst.n_vertices());
    for (std::size_t j = 0; j < dst.fibers.size(); ++j) {
        for (int vid : dst.fibers[j]) {
            double y = dst.xy[vid][1] * y_scale;
            if (clamp_top) y = std::min(y, src.col_height[j]);
            if (y < 0 || y > src.col_height[j] + 1e-9 * std::max(1.0, src.col_height[j]))
                throw std::invalid_argument("transfer_field: evaluation outside source fiber");
            vals[vid] = detail::fiber_eval(src, u, j, std::min(y, src.col_height[j]));
        }
    }
    return FieldP1::full(dst, std::move(vals));
}

/*! Vertical averages (1/depth) int_0^depth u(x1, s) ds per fiber; exact for
    the piecewise-linear restriction. depth must stay inside every column. */
struct FiberAverage {
    std::vector<double> x, value;

    double eval(double xq) const {
        auto it = std::upper_bound(x.begin(), x.end(), xq);
        std::size_t k =
            std::min<std::size_t>(std::max<std::ptrdiff_t>(1, it - x.begin()), x.size() - 1);
        const double w = (xq - x[k - 1]) / (x[k] - x[k - 1]);
        return value[k - 1] + w * (value[k] - value[k - 1]);
    }
};

inline FiberAverage fiber_average(const TriMesh &mesh, const FieldP1 &u, double depth) {
    if (!(depth > 0)) throw ConfigError("fiber_average: depth must be positive");
    for (double h : mesh.col_height)
        if (depth > h + 1e-12)
            throw ConfigError("fiber_average: depth exceeds a column height");
    FiberAverage fa;
    fa.x = mesh.fiber_x;
    fa.value.resize(mesh.fibers.size());
    for (std::size_t j = 0; j < mesh.fibers.size(); ++j) {
        const auto &fib = mesh.fibers[j];
        const int m = static_cast<int>(fib.size()) - 1;
        const double dy = mesh.col_height[j] / m;
        double acc = 0;
        for (int i = 0; i < m; ++i) {
            const double y0 = dy * i;
            if (y0 >= depth) break;
            const double y1 = std::min(depth, dy * (i + 1));
            const double ua = detail::fiber_eval(mesh, u, j, y0);
            const double ub = detail::fiber_eval(mesh, u, j, y1);
            acc += 0.5 * (ua + ub) * (y1 - y0);
        }
        fa.value[j] = acc / depth;
    }
    return fa;
}

/*! Map the solution back to the physical thin domain (x2 scaled by eps);
    vertex values are unchanged, areas scale by eps. */
struct RescaledField {
    TriMesh mesh;
    FieldP1 u;
};

inline RescaledField rescale_thin(const DirectSolution &sol) {
    RescaledField out{sol.mesh, sol.u};
    for (auto &p : out.mesh.xy) p[1] *= sol.epsilon;
    for (auto &h : out.mesh.col_height) h *= sol.epsilon;
    return out;
}

/*! Vertical stretch x2 -> (1 + eta) x2 carrying the field along: the scaled
    field at (x1, (1+eta) x2) equals the original at (x1, x2), so vertex
    values are copied. */
inline RescaledField vertical_scale(const DirectSolution &sol, double eta) {
    if (!(1.0 + eta > 0)) throw ConfigError("vertical_scale: 1 + eta must be positive");
    RescaledField out{sol.mesh, sol.u};
    for (auto &p : out.mesh.xy) p[1] *= (1.0 + eta);
    for (auto &h : out.mesh.col_height) h *= (1.0 + eta);
    return out;
}

/*! Anisotropic norm that makes the vertical stretch an isometry:
    ||u||_{eps, U}^2 = parts(scaled u)/(1+eta) (L2 and x1) + (1+eta)/eps^2 (x2). */
inline double h1_eps_scaled_sq(const NormParts &parts, double eps, double eta) {
    return parts.l2sq / (1.0 + eta) + parts.d1sq / (1.0 + eta) +
           parts.d2sq * (1.0 + eta) / (eps * eps);
}

/*! Reflection extension onto the rectangle stations x [0, y_max]: above the
    graph the value comes from reflecting at the top, with downward
    pre-reflections at multiples of the certified lower bound g0 when the
    reflected point undershoots the bottom (needed when g1 > 2 g0). */
struct GridSample {
    std::vector<double> x, y;   // stations, uniform levels
    std::vector<double> v;      // v[ix * y.size() + iy]

    double at(std::size_t ix, std::size_t iy) const { return v[ix * y.size() + iy]; }
};

inline GridSample extend_reflect(const TriMesh &mesh, const FieldP1 &u, double g0,
                                 double y_max = -1.0, int levels = -1) {
    if (y_max <= 0) {
        for (double h : mesh.col_height) y_max = std::max(y_max, h);
    }
    if (!(g0 > 0)) throw ConfigError("extend_reflect: need positive lower bound");
    int rows = levels;
    if (rows <= 0) rows = 2 * static_cast<int>(mesh.fibers.front().size());
    GridSample gs;
    gs.x = mesh.fiber_x;
    gs.y.resize(rows + 1);
    for (int k = 0; k <= rows; ++k) gs.y[k] = y_max * k / rows;
    gs.v.resize(gs.x.size() * gs.y.size());
    for (std::size_t j = 0; j < gs.x.size(); ++j) {
        const double h = mesh.col_height[j];
        for (std::size_t k = 0; k < gs.y.size(); ++k) {
            double y = gs.y[k];
            // fold y into [0, h] by top reflections and bottom pre-reflections
            int guard = 0;
            while ((y < 0 || y > h) && ++guard < 64) {
                if (y > h) {
                    y = 2 * h - y;
                } else {
                    const int lvl = std::max(1, static_cast<int>(std::ceil(-y / g0 - 1e-12)));
                    y = -y - 2 * (lvl - 1) * g0;
                }
            }
            if (y < 0 || y > h) throw SolverError("extend_reflect: reflection did not settle");
            gs.v[j * gs.y.size() + k] = detail::fiber_eval(mesh, u, j, y);
        }
    }
    return gs;
}

} // namespace thinhomog

#endif
