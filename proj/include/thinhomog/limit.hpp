#ifndef THINHOMOG_LIMIT_HPP
#define THINHOMOG_LIMIT_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "cell.hpp"
#include "common.hpp"
#include "meshing.hpp"

namespace thinhomog {

/*! 1D effective problem on (0,1) with natural ends:
    int r u' v' + p u v = int fhat v for all v. Coefficients come from the
    cell table (one-sided at breakpoints); elements never straddle a
    breakpoint because mesh_interval inserts them as nodes. */
struct LimitSolution {
    IntervalMesh mesh;
    std::vector<double> u;

    double eval(double x) const {
        const auto &xs = mesh.nodes;
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t k = std::min<std::size_t>(
            std::max<std::ptrdiff_t>(1, it - xs.begin()), xs.size() - 1);
        const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        return u[k - 1] + w * (u[k] - u[k - 1]);
    }
};

//! Right-hand side induced by slow-only forcing f0(x): fhat = p(x) f0(x).
inline std::function<double(double)> hat_f_from_f0(const CoefficientTable &table,
                                                   std::function<double(double)> f0) {
    return [&table, f0 = std::move(f0)](double x) { return table.eval(x).p * f0(x); };
}

inline LimitSolution solve_limit(const CoefficientTable &table,
                                 const std::function<double(double)> &fhat,
                                 const IntervalMesh &mesh) {
    const auto &xs = mesh.nodes;
    const int n = static_cast<int>(xs.size());
    if (n < 2) throw ConfigError("solve_limit: need at least one element");
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), rhs(n, 0.0);
    const double gq = 1.0 / std::sqrt(3.0);
    for (int e = 0; e + 1 < n; ++e) {
        const double xa = xs[e], xb = xs[e + 1], h = xb - xa, mid = 0.5 * (xa + xb);
        double kint = 0; // int r over the element
        double m00 = 0, m01 = 0, m11 = 0, f0v = 0, f1v = 0;
        for (int g = 0; g < 2; ++g) {
            const double xg = mid + (g == 0 ? -gq : gq) * 0.5 * h;
            const CoefficientRow c = table.eval(xg);
            const double w = 0.5 * h;
            const double s1 = (xg - xa) / h, s0 = 1.0 - s1;
            kint += w * c.r;
            m00 += w * c.p * s0 * s0;
            m01 += w * c.p * s0 * s1;
            m11 += w * c.p * s1 * s1;
            const double fv = fhat(xg);
            f0v += w * fv * s0;
            f1v += w * fv * s1;
        }
        const double k = kint / (h * h);
        di[e] += k + m00;
        di[e + 1] += k + m11;
        up[e] += -k + m01;
        lo[e + 1] += -k + m01;
        rhs[e] += f0v;
        rhs[e + 1] += f1v;
    }
    // Thomas elimination; the mass part keeps the system positive definite
    std::vector<double> c(n, 0.0), d(n, 0.0);
    c[0] = up[0] / di[0];
    d[0] = rhs[0] / di[0];
    for (int i = 1; i < n; ++i) {
        const double m = di[i] - lo[i] * c[i - 1];
        c[i] = up[i] / m;
        d[i] = (rhs[i] - lo[i] * d[i - 1]) / m;
    }
    LimitSolution sol;
    sol.mesh = mesh;
    sol.u.assign(n, 0.0);
    sol.u[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) sol.u[i] = d[i] - c[i] * sol.u[i + 1];
    return sol;
}

inline LimitSolution solve_limit(const CoefficientTable &table,
                                 const std::function<double(double)> &fhat, int n) {
    return solve_limit(table, fhat, mesh_interval(n, table.breakpoints));
}

/*! Jump of the coefficient-weighted flux r u' at an interior breakpoint,
    one-sided slopes from the adjacent elements. The weak form conserves
    this flux, so the jump vanishes under refinement. */
inline double interface_flux_jump(const LimitSolution &sol, const CoefficientTable &table,
                                  double xi) {
    const auto &xs = sol.mesh.nodes;
    auto it = std::lower_bound(xs.begin(), xs.end(), xi - 1e-13);
    const std::size_t k = static_cast<std::size_t>(it - xs.begin());
    if (k == 0 || k + 1 >= xs.size() || std::abs(xs[k] - xi) > 1e-12)
        throw ConfigError("interface_flux_jump: xi is not an interior mesh node");
    const double dul = (sol.u[k] - sol.u[k - 1]) / (xs[k] - xs[k - 1]);
    const double dur = (sol.u[k + 1] - sol.u[k]) / (xs[k + 1] - xs[k]);
    const double rl = table.eval(xi, Side::Left).r;
    const double rr = table.eval(xi, Side::Right).r;
    return rl * dul - rr * dur;
}

//! Largest |r u'| over elements (element-midpoint r), for relative jump checks.
inline double max_abs_flux(const LimitSolution &sol, const CoefficientTable &table) {
    const auto &xs = sol.mesh.nodes;
    double m = 0;
    for (std::size_t e = 0; e + 1 < xs.size(); ++e) {
        const double du = (sol.u[e + 1] - sol.u[e]) / (xs[e + 1] - xs[e]);
        const double r = table.eval(0.5 * (xs[e] + xs[e + 1])).r;
        m = std::max(m, std::abs(r * du));
    }
    return m;
}

//! L2(0,1) error against a reference function, 4-point Gauss per element.
inline double l2_error(const LimitSolution &sol, const std::function<double(double)> &exact) {
    static const double gp[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                 0.3478548451374538};
    const auto &xs = sol.mesh.nodes;
    double s = 0;
    for (std::size_t e = 0; e + 1 < xs.size(); ++e) {
        const double h = xs[e + 1] - xs[e], mid = 0.5 * (xs[e] + xs[e + 1]);
        for (int g = 0; g < 4; ++g) {
            const double xg = mid + 0.5 * h * gp[g];
            const double w = 0.5 * h * gw[g];
            const double s1 = (xg - xs[e]) / h;
            const double uh = sol.u[e] * (1 - s1) + sol.u[e + 1] * s1;
            const double d = uh - exact(xg);
            s += w * d * d;
        }
    }
    return std::sqrt(s);
}

} // namespace thinhomog

#endif
