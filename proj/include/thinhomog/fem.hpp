#ifndef THINHOMOG_FEM_HPP
#define THINHOMOG_FEM_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "common.hpp"
#include "geometry.hpp"
#include "meshing.hpp"

namespace thinhomog {

/*! Piecewise-linear field: one coefficient per reduced degree of freedom,
    plus the vertex -> dof map (identity when nothing was merged). */
struct FieldP1 {
    std::vector<double> coeffs;
    std::vector<int> dof_of_vertex;

    double at(int vertex) const { return coeffs[dof_of_vertex[vertex]]; }
    int n_dofs() const { return static_cast<int>(coeffs.size()); }

    static FieldP1 full(const TriMesh &mesh, std::vector<double> values) {
        FieldP1 f;
        f.coeffs = std::move(values);
        f.dof_of_vertex.resize(mesh.n_vertices());
        std::iota(f.dof_of_vertex.begin(), f.dof_of_vertex.end(), 0);
        return f;
    }
    template <typename Fn>
    static FieldP1 nodal(const TriMesh &mesh, Fn &&fn) {
        std::vector<double> v(mesh.n_vertices());
        for (int i = 0; i < mesh.n_vertices(); ++i) v[i] = fn(mesh.xy[i][0], mesh.xy[i][1]);
        return full(mesh, std::move(v));
    }
};

//! c = a - b; both fields must share the same dof layout.
inline FieldP1 subtract(const FieldP1 &a, const FieldP1 &b) {
    if (a.coeffs.size() != b.coeffs.size() || a.dof_of_vertex != b.dof_of_vertex)
        throw std::invalid_argument("subtract: dof layouts differ");
    FieldP1 c = a;
    for (std::size_t i = 0; i < c.coeffs.size(); ++i) c.coeffs[i] -= b.coeffs[i];
    return c;
}

struct Triplet {
    int i, j;
    double v;
};

/*! Compressed sparse rows, built from (deterministically ordered) triplets. */
struct CSR {
    int n = 0;
    std::vector<int> ia, ja;
    std::vector<double> a;

    static CSR from_triplets(int n, std::vector<Triplet> trips) {
        std::sort(trips.begin(), trips.end(), [](const Triplet &x, const Triplet &y) {
            return x.i != y.i ? x.i < y.i : x.j < y.j;
        });
        CSR m;
        m.n = n;
        m.ia.assign(n + 1, 0);
        for (std::size_t k = 0; k < trips.size();) {
            std::size_t k2 = k + 1;
            while (k2 < trips.size() && trips[k2].i == trips[k].i && trips[k2].j == trips[k].j) ++k2;
            double s = 0;
            for (std::size_t t = k; t < k2; ++t) s += trips[t].v;
            m.ja.push_back(trips[k].j);
            m.a.push_back(s);
            ++m.ia[trips[k].i + 1];
            k = k2;
        }
        for (int i = 0; i < n; ++i) m.ia[i + 1] += m.ia[i];
        return m;
    }

    void matvec(const std::vector<double> &x, std::vector<double> &y) const {
        for (int i = 0; i < n; ++i) {
            double s = 0;
            for (int k = ia[i]; k < ia[i + 1]; ++k) s += a[k] * x[ja[k]];
            y[i] = s;
        }
    }
    std::vector<double> diagonal() const {
        std::vector<double> d(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = ia[i]; k < ia[i + 1]; ++k)
                if (ja[k] == i) d[i] += a[k];
        return d;
    }
};

/*! Element assembly output in full vertex numbering. */
struct Assembled {
    int nv = 0;
    std::vector<Triplet> trips;
    std::vector<double> rhs;
};

namespace detail {
inline std::array<std::array<double, 2>, 3> edge_midpoints(const TriMesh &mesh, int t) {
    const auto &tr = mesh.tris[t];
    const auto &p0 = mesh.xy[tr[0]], &p1 = mesh.xy[tr[1]], &p2 = mesh.xy[tr[2]];
    return {{{0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])},
             {0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1])},
             {0.5 * (p2[0] + p0[0]), 0.5 * (p2[1] + p0[1])}}};
}
// P1 basis values at the three edge midpoints (rows: midpoint, cols: vertex).
inline constexpr double kMidBasis[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
} // namespace detail

/*! Stiffness + mass with constant diagonal anisotropy:
    a(u,v) = int w1 du dv (x1 parts) + w2 (x2 parts) + mass u v.
    Stiffness is exact for P1; the consistent mass matrix is exact. */
inline Assembled assemble_operator(const TriMesh &mesh, double w1, double w2, double mass) {
    Assembled out;
    out.nv = mesh.n_vertices();
    out.rhs.assign(out.nv, 0.0);
    out.trips.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 9);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto g = mesh.shape_gradients(t);
        const double area = mesh.tri_area(t);
        const auto &tr = mesh.tris[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double v = area * (w1 * g[i][0] * g[j][0] + w2 * g[i][1] * g[j][1]);
                if (mass != 0.0) v += mass * area / 12.0 * (i == j ? 2.0 : 1.0);
                out.trips.push_back({tr[i], tr[j], v});
            }
    }
    return out;
}

/*! Variable-coefficient stiffness int grad v . A(x) grad u + mass u v, with
    A symmetric 2x2 returned as {a11, a12, a22}; A is averaged over the three
    edge midpoints per triangle (second order). */
template <typename MatFn>
inline Assembled assemble_operator_variable(const TriMesh &mesh, MatFn &&A, double mass = 0.0) {
    Assembled out;
    out.nv = mesh.n_vertices();
    out.rhs.assign(out.nv, 0.0);
    out.trips.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 9);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto g = mesh.shape_gradients(t);
        const double area = mesh.tri_area(t);
        const auto mids = detail::edge_midpoints(mesh, t);
        double a11 = 0, a12 = 0, a22 = 0;
        for (const auto &mp : mids) {
            const std::array<double, 3> m = A(mp[0], mp[1]);
            a11 += m[0] / 3.0;
            a12 += m[1] / 3.0;
            a22 += m[2] / 3.0;
        }
        const auto &tr = mesh.tris[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double v = area * (a11 * g[i][0] * g[j][0] + a22 * g[i][1] * g[j][1] +
                                   a12 * (g[i][0] * g[j][1] + g[i][1] * g[j][0]));
                if (mass != 0.0) v += mass * area / 12.0 * (i == j ? 2.0 : 1.0);
                out.trips.push_back({tr[i], tr[j], v});
            }
    }
    return out;
}

/*! Right-hand side int f v by the edge-midpoint rule (exact for quadratics). */
template <typename Fn>
inline void add_load_function(Assembled &sys, const TriMesh &mesh, Fn &&f) {
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const double w = mesh.tri_area(t) / 3.0;
        const auto mids = detail::edge_midpoints(mesh, t);
        const auto &tr = mesh.tris[t];
        for (int q = 0; q < 3; ++q) {
            const double fv = f(mids[q][0], mids[q][1]);
            for (int i = 0; i < 3; ++i) sys.rhs[tr[i]] += w * fv * detail::kMidBasis[q][i];
        }
    }
}

inline void add_load_vector(Assembled &sys, const std::vector<double> &v) {
    if (v.size() != sys.rhs.size()) throw std::invalid_argument("add_load_vector: size mismatch");
    for (std::size_t i = 0; i < v.size(); ++i) sys.rhs[i] += v[i];
}

/*! Quadrature-consistent squared L2 norm of a callable (same midpoint rule
    as the load assembly). */
template <typename Fn>
inline double l2sq_quadrature(const TriMesh &mesh, Fn &&f) {
    double s = 0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const double w = mesh.tri_area(t) / 3.0;
        const auto mids = detail::edge_midpoints(mesh, t);
        for (const auto &mp : mids) {
            const double fv = f(mp[0], mp[1]);
            s += w * fv * fv;
        }
    }
    return s;
}

/*! Boundary load for the cell problem: the line integral
    - int_0^L G'(y1) v(y1, G(y1)) dy1 over the oscillating top, integrated on
    the straight mesh edges with the exact slope G' at edge midpoints. Only
    the oscillating part of G contributes, so flat pieces give exact zeros. */
inline std::vector<double> top_neumann_load(const TriMesh &mesh, const GeometrySpec &spec,
                                            double x, Side side = Side::Left) {
    std::vector<double> load(mesh.n_vertices(), 0.0);
    for (const auto &e : mesh.boundary) {
        if (e.tag != BoundaryTag::Top) continue;
        const double ya = mesh.xy[e.a][0], yb = mesh.xy[e.b][0];
        const double half = 0.5 * (yb - ya);
        const double gm = spec.osc_deriv(x, 0.5 * (ya + yb), side);
        load[e.a] -= gm * half;
        load[e.b] -= gm * half;
    }
    return load;
}

/*! Reduced, optionally mean-constrained symmetric system ready to solve.
    When zero_mean is set the matrix carries one extra Lagrange row/column
    whose weights are the exact integrals of the (merged) basis functions. */
struct ConstrainedSystem {
    int n_dofs = 0;
    bool zero_mean = false;
    std::vector<int> dof_of_vertex;
    CSR matrix;
    std::vector<double> rhs;
};

inline ConstrainedSystem constrain(const Assembled &sys, const TriMesh &mesh,
                                   bool periodic, bool zero_mean) {
    ConstrainedSystem out;
    const int nv = sys.nv;
    std::vector<int> target(nv);
    std::iota(target.begin(), target.end(), 0);
    if (periodic) {
        for (const auto &[l, r] : mesh.periodic_pairs) target[r] = l;
    }
    // compact renumbering in ascending original order
    out.dof_of_vertex.assign(nv, -1);
    int nd = 0;
    for (int v = 0; v < nv; ++v)
        if (target[v] == v) out.dof_of_vertex[v] = nd++;
    for (int v = 0; v < nv; ++v)
        if (target[v] != v) out.dof_of_vertex[v] = out.dof_of_vertex[target[v]];
    out.n_dofs = nd;
    out.zero_mean = zero_mean;

    const int dim = nd + (zero_mean ? 1 : 0);
    std::vector<Triplet> trips;
    trips.reserve(sys.trips.size() + (zero_mean ? 2 * static_cast<std::size_t>(nd) : 0));
    for (const auto &t : sys.trips)
        trips.push_back({out.dof_of_vertex[t.i], out.dof_of_vertex[t.j], t.v});
    out.rhs.assign(dim, 0.0);
    for (int v = 0; v < nv; ++v) out.rhs[out.dof_of_vertex[v]] += sys.rhs[v];

    if (zero_mean) {
        // exact int of each merged basis function: area/3 per adjacent triangle
        std::vector<double> w(nd, 0.0);
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            const double third = mesh.tri_area(t) / 3.0;
            for (int i = 0; i < 3; ++i) w[out.dof_of_vertex[mesh.tris[t][i]]] += third;
        }
        for (int d = 0; d < nd; ++d) {
            if (w[d] == 0.0) continue;
            trips.push_back({nd, d, w[d]});
            trips.push_back({d, nd, w[d]});
        }
    }
    out.matrix = CSR::from_triplets(dim, std::move(trips));
    return out;
}

struct SolveStats {
    int iterations = 0;
    double relres = 0;
    double multiplier = 0; // Lagrange multiplier value when present
};

namespace detail {

inline double dot(const std::vector<double> &a, const std::vector<double> &b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/*! Jacobi-preconditioned conjugate gradients; relative residual in the
    2-norm. Throws SolverError at the iteration cap. */
inline SolveStats cg(const CSR &A, const std::vector<double> &b, std::vector<double> &x,
                     double tol, int maxit) {
    const int n = A.n;
    x.assign(n, 0.0);
    std::vector<double> d = A.diagonal();
    for (double &v : d) v = (v > 0) ? 1.0 / v : 1.0;
    std::vector<double> r = b, z(n), p(n), Ap(n);
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0) return {0, 0.0, 0.0};
    for (int i = 0; i < n; ++i) z[i] = d[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= maxit; ++it) {
        A.matvec(p, Ap);
        const double alpha = rz / dot(p, Ap);
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        const double rn = std::sqrt(dot(r, r));
        if (rn <= tol * bnorm) return {it, rn / bnorm, 0.0};
        for (int i = 0; i < n; ++i) z[i] = d[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverError("cg: iteration cap " + std::to_string(maxit) +
                      " reached, relative residual " +
                      fmt_g(std::sqrt(dot(r, r)) / bnorm));
}

/*! One diagonally preconditioned MINRES sweep (classic Paige-Saunders
    recurrences) for the symmetric, possibly indefinite system. Adds the
    correction to x; the residual estimate lives in the preconditioned
    norm. Returns iterations used. */
inline int minres_sweep(const CSR &A, const std::vector<double> &prec,
                        const std::vector<double> &b, std::vector<double> &x, double target,
                        int maxit) {
    const int n = A.n;
    std::vector<double> r1 = b, r2 = b, y(n), v(n), w(n, 0.0), w2(n, 0.0);
    for (int i = 0; i < n; ++i) y[i] = prec[i] * r1[i];
    const double beta1 = std::sqrt(dot(r1, y));
    if (beta1 == 0) return 0;

    double oldb = 0, beta = beta1, dbar = 0, epsln = 0, phibar = beta1;
    double cs = -1, sn = 0, oldeps = 0;

    int it = 0;
    for (it = 1; it <= maxit; ++it) {
        const double s = 1.0 / beta;
        for (int i = 0; i < n; ++i) v[i] = s * y[i];
        A.matvec(v, y);
        if (it >= 2)
            for (int i = 0; i < n; ++i) y[i] -= (beta / oldb) * r1[i];
        const double alfa = dot(v, y);
        for (int i = 0; i < n; ++i) y[i] -= (alfa / beta) * r2[i];
        r1 = r2;
        r2 = y;
        for (int i = 0; i < n; ++i) y[i] = prec[i] * r2[i];
        oldb = beta;
        beta = std::sqrt(dot(r2, y));

        oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        double gamma = std::sqrt(gbar * gbar + beta * beta);
        gamma = std::max(gamma, std::numeric_limits<double>::min());
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;

        for (int i = 0; i < n; ++i) {
            const double wi = (v[i] - oldeps * w2[i] - delta * w[i]) / gamma;
            w2[i] = w[i];
            w[i] = wi;
            x[i] += phi * wi;
        }
        if (phibar <= target * beta1) break;
    }
    return std::min(it, maxit);
}

/*! MINRES with true-residual restarts: recurrence drift near tight
    tolerances is flushed by re-running the sweep on the exact residual. */
inline SolveStats minres(const CSR &A, const std::vector<double> &b, std::vector<double> &x,
                         double tol, int maxit) {
    const int n = A.n;
    x.assign(n, 0.0);
    std::vector<double> prec = A.diagonal();
    double dmean = 0;
    int dcnt = 0;
    for (double v : prec)
        if (v > 0) { dmean += v; ++dcnt; }
    dmean = dcnt ? dmean / dcnt : 1.0;
    for (double &v : prec) v = (v > 0) ? 1.0 / v : 1.0 / dmean;

    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0) return {0, 0.0, 0.0};

    std::vector<double> r = b, dx(n, 0.0), Ax(n);
    int total_it = 0;
    double relres = 1.0;
    for (int sweep = 0; sweep < 4; ++sweep) {
        total_it += minres_sweep(A, prec, r, dx, tol * 0.02, maxit);
        for (int i = 0; i < n; ++i) x[i] += dx[i];
        A.matvec(x, Ax);
        for (int i = 0; i < n; ++i) r[i] = b[i] - Ax[i];
        relres = std::sqrt(dot(r, r)) / bnorm;
        if (relres <= tol) return {total_it, relres, 0.0};
        std::fill(dx.begin(), dx.end(), 0.0);
    }
    throw SolverError("minres: stagnated at relative residual " + fmt_g(relres));
}

} // namespace detail

/*! Solve the constrained system: CG when definite, MINRES when the mean
    constraint makes it a saddle problem. Returns the primary field and
    solver diagnostics. */
inline std::pair<FieldP1, SolveStats> solve(const ConstrainedSystem &sys, double tol = 1e-10,
                                            int maxit = 0) {
    if (!(tol > 0) || tol > 1e-6) throw ConfigError("solve: tol must lie in (0, 1e-6]");
    const int dim = sys.matrix.n;
    if (maxit <= 0) maxit = std::max(20000, 40 * static_cast<int>(std::sqrt(double(dim)) + 1));
    std::vector<double> x;
    SolveStats st = sys.zero_mean ? detail::minres(sys.matrix, sys.rhs, x, tol, maxit)
                                  : detail::cg(sys.matrix, sys.rhs, x, tol, maxit);
    FieldP1 f;
    f.dof_of_vertex = sys.dof_of_vertex;
    f.coeffs.assign(x.begin(), x.begin() + sys.n_dofs);
    if (sys.zero_mean) st.multiplier = x[sys.n_dofs];
    for (double v : f.coeffs)
        if (!std::isfinite(v)) throw SolverError("solve: non-finite solution entry");
    return {std::move(f), st};
}

/*! Squared-norm pieces of a P1 field: L2, x1-derivative, x2-derivative.
    Combine as l2sq + d1sq + d2sq / eps^2 for the anisotropic norm. */
struct NormParts {
    double l2sq = 0, d1sq = 0, d2sq = 0;

    double h1_eps_sq(double eps) const { return l2sq + d1sq + d2sq / (eps * eps); }
    NormParts &operator+=(const NormParts &o) {
        l2sq += o.l2sq;
        d1sq += o.d1sq;
        d2sq += o.d2sq;
        return *this;
    }
};

namespace detail {
inline NormParts tri_norm_parts(const TriMesh &mesh, const FieldP1 &u, int t) {
    const auto g = mesh.shape_gradients(t);
    const auto &tr = mesh.tris[t];
    const double area = mesh.tri_area(t);
    double gx = 0, gy = 0;
    for (int i = 0; i < 3; ++i) {
        const double ui = u.at(tr[i]);
        gx += ui * g[i][0];
        gy += ui * g[i][1];
    }
    // edge-midpoint rule is exact for the square of a P1 function
    double l2 = 0;
    const double u0 = u.at(tr[0]), u1 = u.at(tr[1]), u2 = u.at(tr[2]);
    const double m01 = 0.5 * (u0 + u1), m12 = 0.5 * (u1 + u2), m20 = 0.5 * (u2 + u0);
    l2 = area / 3.0 * (m01 * m01 + m12 * m12 + m20 * m20);
    return {l2, area * gx * gx, area * gy * gy};
}
} // namespace detail

inline NormParts norm_parts(const TriMesh &mesh, const FieldP1 &u) {
    NormParts total;
    for (int t = 0; t < mesh.n_triangles(); ++t) total += detail::tri_norm_parts(mesh, u, t);
    return total;
}

template <typename Pred>
inline NormParts norm_parts_where(const TriMesh &mesh, const FieldP1 &u, Pred &&keep_triangle) {
    NormParts total;
    for (int t = 0; t < mesh.n_triangles(); ++t)
        if (keep_triangle(t)) total += detail::tri_norm_parts(mesh, u, t);
    return total;
}

inline double h1_eps_norm_sq(const TriMesh &mesh, const FieldP1 &u, double eps) {
    return norm_parts(mesh, u).h1_eps_sq(eps);
}

/*! Norm over the part of the mesh above (or below) a per-station cut line
    that is linear within each column interval: triangles are clipped
    against the cut exactly, so sub-cell strips integrate exactly. cut has
    one value per station (mesh.fiber_x). */
inline NormParts norm_parts_clipped(const TriMesh &mesh, const FieldP1 &u,
                                    const std::vector<double> &cut, bool above) {
    if (cut.size() != mesh.fiber_x.size())
        throw std::invalid_argument("norm_parts_clipped: one cut value per station required");
    NormParts total;
    std::array<std::array<double, 2>, 8> poly, tmp;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const int col = mesh.tri_col[t];
        const double xa = mesh.fiber_x[col], xb = mesh.fiber_x[col + 1];
        const double ca = cut[col], cb = cut[col + 1];
        const auto &tr = mesh.tris[t];
        // signed distance to the cut: positive above
        auto level = [&](double x, double y) {
            return y - (ca + (cb - ca) * (x - xa) / (xb - xa));
        };
        int np = 3;
        for (int i = 0; i < 3; ++i) poly[i] = mesh.xy[tr[i]];
        // Sutherland-Hodgman against one halfplane
        int nt = 0;
        for (int i = 0; i < np; ++i) {
            const auto &P = poly[i];
            const auto &Q = poly[(i + 1) % np];
            double sp = level(P[0], P[1]), sq = level(Q[0], Q[1]);
            if (!above) {
                sp = -sp;
                sq = -sq;
            }
            if (sp >= 0) tmp[nt++] = P;
            if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0)) {
                const double w = sp / (sp - sq);
                tmp[nt++] = {P[0] + w * (Q[0] - P[0]), P[1] + w * (Q[1] - P[1])};
            }
        }
        if (nt < 3) continue;

        // affine representation of u on the parent triangle
        const auto g = mesh.shape_gradients(t);
        double gx = 0, gy = 0;
        for (int i = 0; i < 3; ++i) {
            gx += u.at(tr[i]) * g[i][0];
            gy += u.at(tr[i]) * g[i][1];
        }
        const double a0 = u.at(tr[0]) - gx * mesh.xy[tr[0]][0] - gy * mesh.xy[tr[0]][1];
        auto ueval = [&](double x, double y) { return a0 + gx * x + gy * y; };

        for (int i = 1; i + 1 < nt; ++i) { // fan triangulation of the clipped polygon
            const auto &p0 = tmp[0], &p1 = tmp[i], &p2 = tmp[i + 1];
            const double area =
                0.5 * std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
            if (area <= 0) continue;
            const double m0 = ueval(0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1]));
            const double m1 = ueval(0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1]));
            const double m2 = ueval(0.5 * (p2[0] + p0[0]), 0.5 * (p2[1] + p0[1]));
            total.l2sq += area / 3.0 * (m0 * m0 + m1 * m1 + m2 * m2);
            total.d1sq += area * gx * gx;
            total.d2sq += area * gy * gy;
        }
    }
    return total;
}

//! Exact integral of a P1 field over the mesh.
inline double integrate(const TriMesh &mesh, const FieldP1 &u) {
    double s = 0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto &tr = mesh.tris[t];
        s += mesh.tri_area(t) / 3.0 * (u.at(tr[0]) + u.at(tr[1]) + u.at(tr[2]));
    }
    return s;
}

//! Pairing of a full-numbering load vector with a field: l(u).
inline double pair_load(const std::vector<double> &load, const FieldP1 &u) {
    double s = 0;
    for (std::size_t v = 0; v < load.size(); ++v) s += load[v] * u.at(static_cast<int>(v));
    return s;
}

} // namespace thinhomog

#endif
