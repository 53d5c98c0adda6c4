#ifndef THINHOMOG_GEOMETRY_HPP
#define THINHOMOG_GEOMETRY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace thinhomog {

/*! Which one-sided limit to take when x lands exactly on an interior
    breakpoint. Default: the breakpoint belongs to the piece on its left. */
enum class Side { Left, Right };

/*! Cubic polynomial in x with coefficients c[0] + c[1]x + c[2]x^2 + c[3]x^3. */
struct Poly3 {
    std::array<double, 4> c{0, 0, 0, 0};

    double eval(double x) const { return ((c[3] * x + c[2]) * x + c[1]) * x + c[0]; }
    double deriv(double x) const { return (3 * c[3] * x + 2 * c[2]) * x + c[1]; }
    // Crude sup bounds on [0,1], used only for certification padding.
    double bound() const { return std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2]) + std::abs(c[3]); }
    double deriv_bound() const { return std::abs(c[1]) + 2 * std::abs(c[2]) + 3 * std::abs(c[3]); }
};

/*! Finite Fourier series g(y) = c0 + sum_k ck cos(2 pi k y / L) + sk sin(2 pi k y / L).
    The period L lives on the owning GeometrySpec. */
struct FourierProfile {
    double c0 = 0;
    std::vector<double> cosk, sink; // index k-1 holds the k-th harmonic

    double eval(double y, double L) const {
        double v = c0;
        const double w = 2 * kPi / L;
        for (std::size_t k = 0; k < cosk.size(); ++k) v += cosk[k] * std::cos(w * (k + 1) * y);
        for (std::size_t k = 0; k < sink.size(); ++k) v += sink[k] * std::sin(w * (k + 1) * y);
        return v;
    }
    double deriv(double y, double L) const {
        double v = 0;
        const double w = 2 * kPi / L;
        for (std::size_t k = 0; k < cosk.size(); ++k) v -= cosk[k] * w * (k + 1) * std::sin(w * (k + 1) * y);
        for (std::size_t k = 0; k < sink.size(); ++k) v += sink[k] * w * (k + 1) * std::cos(w * (k + 1) * y);
        return v;
    }
    //! Exact antiderivative int_0^y g(s) ds; valid for all real y.
    double antider(double y, double L) const {
        double v = c0 * y;
        const double w = 2 * kPi / L;
        for (std::size_t k = 0; k < cosk.size(); ++k)
            v += cosk[k] / (w * (k + 1)) * std::sin(w * (k + 1) * y);
        for (std::size_t k = 0; k < sink.size(); ++k)
            v += sink[k] / (w * (k + 1)) * (1 - std::cos(w * (k + 1) * y));
        return v;
    }
    double bound() const {
        double v = std::abs(c0);
        for (double x : cosk) v += std::abs(x);
        for (double x : sink) v += std::abs(x);
        return v;
    }
    double deriv_bound(double L) const {
        double v = 0;
        const double w = 2 * kPi / L;
        for (std::size_t k = 0; k < cosk.size(); ++k) v += std::abs(cosk[k]) * w * (k + 1);
        for (std::size_t k = 0; k < sink.size(); ++k) v += std::abs(sink[k]) * w * (k + 1);
        return v;
    }
};

struct ProfileTerm {
    Poly3 poly;
    int profile = 0;
};

/*! One x-piece of the height function: G(x,y) = a(x) + sum_t poly_t(x) * g_{t}(y). */
struct Piece {
    Poly3 a;
    std::vector<ProfileTerm> terms;
};

struct GeomValue {
    double g;  // height
    double gx; // d/dx at fixed y (one-sided at breakpoints)
    double gy; // d/dy
};

struct ValidationReport {
    double g0 = 0, g1 = 0;      // certified bounds: g0 <= G <= g1
    double sup_dx = 0, sup_dy = 0; // dense-sample estimates of sup |dG/dx|, |dG/dy|
    bool pass = false;          // g0 > 0 and finite slopes
    std::string message;
};

/*! Height function G(x,y) on [0,1] x R: piecewise in x with breakpoints
    0 = xi_0 < ... < xi_N = 1, L-periodic in y, finite Fourier in y and
    cubic in x within each piece. Construction certifies positive lower
    bound g0 and upper bound g1 (sampled extrema padded by a Lipschitz
    margin, so g0 <= inf G and sup G <= g1 holds). */
class GeometrySpec {
  public:
    double L = 1.0;
    std::vector<double> breakpoints{0.0, 1.0};
    std::vector<Piece> pieces{Piece{}};
    std::vector<FourierProfile> profiles;

    double g0 = 0, g1 = 0;

    GeometrySpec() = default;

    static GeometrySpec constant(double c, double period = 1.0) {
        GeometrySpec s;
        s.L = period;
        s.pieces[0].a.c[0] = c;
        s.certify();
        return s;
    }

    //! a + amp * sin(2 pi k y / L)
    static GeometrySpec sinusoid(double a, double amp, int k = 1, double period = 1.0) {
        GeometrySpec s;
        s.L = period;
        s.pieces[0].a.c[0] = a;
        FourierProfile p;
        p.sink.assign(k, 0.0);
        p.sink[k - 1] = 1.0;
        s.profiles.push_back(p);
        s.pieces[0].terms.push_back({Poly3{{amp, 0, 0, 0}}, 0});
        s.certify();
        return s;
    }

    //! Piecewise-flat heights with interior breakpoints.
    static GeometrySpec piecewise_flat(const std::vector<double> &heights,
                                       const std::vector<double> &bps, double period = 1.0) {
        GeometrySpec s;
        s.L = period;
        s.breakpoints = bps;
        s.pieces.clear();
        for (double h : heights) {
            Piece p;
            p.a.c[0] = h;
            s.pieces.push_back(p);
        }
        s.certify();
        return s;
    }

    std::size_t piece_index(double x, Side side = Side::Left) const {
        const double tol = 1e-12;
        if (x < -tol || x > 1 + tol) throw ConfigError("geometry eval: x outside [0,1]");
        x = std::clamp(x, 0.0, 1.0);
        if (side == Side::Left) {
            // first breakpoint >= x, piece to its left; x=0 maps to piece 0
            auto it = std::lower_bound(breakpoints.begin() + 1, breakpoints.end(), x);
            return static_cast<std::size_t>(it - breakpoints.begin()) - 1;
        }
        auto it = std::upper_bound(breakpoints.begin(), breakpoints.end() - 1, x);
        return static_cast<std::size_t>(it - breakpoints.begin()) - 1;
    }

    GeomValue eval(double x, double y, Side side = Side::Left) const {
        const Piece &p = pieces[piece_index(x, side)];
        const double yr = reduce(y);
        GeomValue v{p.a.eval(x), p.a.deriv(x), 0.0};
        for (const auto &t : p.terms) {
            const FourierProfile &pr = profiles[t.profile];
            const double g = pr.eval(yr, L);
            v.g += t.poly.eval(x) * g;
            v.gx += t.poly.deriv(x) * g;
            v.gy += t.poly.eval(x) * pr.deriv(yr, L);
        }
        return v;
    }

    double height(double x, double y, Side side = Side::Left) const { return eval(x, y, side).g; }

    //! Exact int_0^y G(x,s) ds at fixed x.
    double antider_y(double x, double y, Side side = Side::Left) const {
        const Piece &p = pieces[piece_index(x, side)];
        double v = p.a.eval(x) * y;
        for (const auto &t : p.terms) v += t.poly.eval(x) * profiles[t.profile].antider(y, L);
        return v;
    }

    //! Exact mean of y -> G(x,y) over [ya, yb].
    double mean_y(double x, double ya, double yb, Side side = Side::Left) const {
        return (antider_y(x, yb, side) - antider_y(x, ya, side)) / (yb - ya);
    }

    //! Oscillating part G(x,y) - a(x); identically zero for flat pieces.
    double osc(double x, double y, Side side = Side::Left) const {
        const Piece &p = pieces[piece_index(x, side)];
        const double yr = reduce(y);
        double v = 0;
        for (const auto &t : p.terms) v += t.poly.eval(x) * profiles[t.profile].eval(yr, L);
        return v;
    }

    //! Exact mean of the oscillating part over [ya, yb]; exactly zero when flat.
    double osc_mean_y(double x, double ya, double yb, Side side = Side::Left) const {
        const Piece &p = pieces[piece_index(x, side)];
        double v = 0;
        for (const auto &t : p.terms)
            v += t.poly.eval(x) *
                 (profiles[t.profile].antider(yb, L) - profiles[t.profile].antider(ya, L));
        return v / (yb - ya);
    }

    //! d/dy of the oscillating part; identically zero for flat pieces.
    double osc_deriv(double x, double y, Side side = Side::Left) const {
        const Piece &p = pieces[piece_index(x, side)];
        const double yr = reduce(y);
        double v = 0;
        for (const auto &t : p.terms) v += t.poly.eval(x) * profiles[t.profile].deriv(yr, L);
        return v;
    }

    //! True when G is independent of x on piece i (constant a, constant term polys).
    bool piece_x_independent(std::size_t i) const {
        const Piece &p = pieces[i];
        auto poly_const = [](const Poly3 &q) { return q.c[1] == 0 && q.c[2] == 0 && q.c[3] == 0; };
        if (!poly_const(p.a)) return false;
        for (const auto &t : p.terms)
            if (!poly_const(t.poly)) return false;
        return true;
    }

    bool x_independent() const {
        for (std::size_t i = 0; i < pieces.size(); ++i)
            if (!piece_x_independent(i)) return false;
        // piece values must also agree across breakpoints
        for (std::size_t i = 1; i < pieces.size(); ++i) {
            double xl = breakpoints[i];
            if (std::abs(eval(xl, 0.3 * L, Side::Left).g - eval(xl, 0.3 * L, Side::Right).g) > 1e-14)
                return false;
        }
        return pieces.size() == 1 || true;
    }

    /*! Recompute certified bounds. Flat pieces certify exactly; otherwise
        sampled extrema are padded by Lipschitz * half step. */
    void certify() {
        const int ny = 4096;
        double mn = std::numeric_limits<double>::infinity(), mx = -mn;
        double pad = 0;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            const Piece &p = pieces[i];
            bool flat_x = piece_x_independent(i);
            bool flat_y = p.terms.empty();
            int nx = flat_x ? 1 : 129;
            int nyy = flat_y ? 1 : ny;
            double lip_x = p.a.deriv_bound(), lip_y = 0;
            for (const auto &t : p.terms) {
                lip_x += t.poly.deriv_bound() * profiles[t.profile].bound();
                lip_y += t.poly.bound() * profiles[t.profile].deriv_bound(L);
            }
            const double x0 = breakpoints[i], x1 = breakpoints[i + 1];
            for (int a = 0; a < nx; ++a) {
                double x = nx == 1 ? x0 : x0 + (x1 - x0) * a / (nx - 1);
                Side side = (a == 0) ? Side::Right : Side::Left;
                for (int b = 0; b < nyy; ++b) {
                    double y = L * b / std::max(nyy, 1);
                    double g = eval(x, y, side).g;
                    mn = std::min(mn, g);
                    mx = std::max(mx, g);
                }
            }
            double piece_pad = (nx > 1 ? lip_x * (x1 - x0) / (2 * (nx - 1)) : 0.0) +
                               (nyy > 1 ? lip_y * L / (2 * nyy) : 0.0);
            pad = std::max(pad, piece_pad);
        }
        g0 = mn - pad;
        g1 = mx + pad;
    }

    double reduce(double y) const {
        double r = std::fmod(y, L);
        if (r < 0) r += L;
        return r;
    }
};

/*! Dense-sample hypothesis check: positive certified lower bound and
    finite slope estimates. */
inline ValidationReport validate_hypothesis(const GeometrySpec &s) {
    ValidationReport rep;
    GeometrySpec c = s;
    c.certify();
    rep.g0 = c.g0;
    rep.g1 = c.g1;
    const int ny = 4096, nx = 129;
    for (std::size_t i = 0; i < s.pieces.size(); ++i) {
        bool flat_x = s.piece_x_independent(i);
        bool flat_y = s.pieces[i].terms.empty();
        int nxx = flat_x ? 2 : nx;
        int nyy = flat_y ? 1 : ny;
        const double x0 = s.breakpoints[i], x1 = s.breakpoints[i + 1];
        for (int a = 0; a < nxx; ++a) {
            double x = x0 + (x1 - x0) * a / (nxx - 1);
            Side side = (a == 0) ? Side::Right : Side::Left;
            for (int b = 0; b < nyy; ++b) {
                double y = s.L * b / std::max(nyy, 1);
                GeomValue v = s.eval(x, y, side);
                rep.sup_dx = std::max(rep.sup_dx, std::abs(v.gx));
                rep.sup_dy = std::max(rep.sup_dy, std::abs(v.gy));
            }
        }
    }
    rep.pass = rep.g0 > 0 && std::isfinite(rep.sup_dx) && std::isfinite(rep.sup_dy);
    rep.message = rep.pass ? "ok" : "lower bound not positive";
    return rep;
}

/*! Sampled sup |G - Ghat| + sup |dy(G - Ghat)| over the union breakpoint
    refinement. Symmetric; vanishes for identical specs. */
inline double c1_distance(const GeometrySpec &a, const GeometrySpec &b) {
    if (std::abs(a.L - b.L) > 1e-14) throw ConfigError("c1_distance: periods differ");
    std::vector<double> bps = a.breakpoints;
    bps.insert(bps.end(), b.breakpoints.begin(), b.breakpoints.end());
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end(),
                          [](double u, double v) { return std::abs(u - v) < 1e-13; }),
              bps.end());
    const int ny = 4096;
    double sup0 = 0, sup1 = 0;
    for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
        const double x0 = bps[i], x1 = bps[i + 1];
        bool flat = true;
        for (std::size_t k = 0; k < a.pieces.size(); ++k) flat = flat && a.piece_x_independent(k);
        for (std::size_t k = 0; k < b.pieces.size(); ++k) flat = flat && b.piece_x_independent(k);
        int nxx = flat ? 2 : 65;
        for (int s = 0; s < nxx; ++s) {
            double x = x0 + (x1 - x0) * s / (nxx - 1);
            Side side = (s == 0) ? Side::Right : Side::Left;
            for (int t = 0; t < ny; ++t) {
                double y = a.L * t / ny;
                GeomValue va = a.eval(x, y, side), vb = b.eval(x, y, side);
                sup0 = std::max(sup0, std::abs(va.g - vb.g));
                sup1 = std::max(sup1, std::abs(va.gy - vb.gy));
            }
        }
    }
    return sup0 + sup1;
}

/*! The oscillating boundary x -> G(x, x/epsilon) of the rescaled domain. */
struct EpsilonProfile {
    const GeometrySpec *spec;
    double epsilon;

    double height(double x, Side side = Side::Left) const {
        return spec->eval(x, x / epsilon, side).g;
    }
    double slope(double x, Side side = Side::Left) const {
        GeomValue v = spec->eval(x, x / epsilon, side);
        return v.gx + v.gy / epsilon;
    }
    //! Dense-sample estimate of sup |d/dx G(x, x/eps)|; finite for fixed epsilon.
    double sup_abs_slope(int samples = 8192) const {
        double m = 0;
        for (int i = 0; i <= samples; ++i) m = std::max(m, std::abs(slope(double(i) / samples)));
        return m;
    }
};

//! Uniform vertical shift: G + delta (C1 distance exactly |delta|).
inline GeometrySpec shifted(const GeometrySpec &s, double delta) {
    GeometrySpec out = s;
    for (auto &p : out.pieces) p.a.c[0] += delta;
    out.certify();
    return out;
}

//! Scale every oscillating term by (1 + delta), keeping the mean parts.
inline GeometrySpec amplitude_scaled(const GeometrySpec &s, double delta) {
    GeometrySpec out = s;
    for (auto &p : out.pieces)
        for (auto &t : p.terms)
            for (auto &c : t.poly.c) c *= (1.0 + delta);
    out.certify();
    return out;
}

/*! Strict JSON -> GeometrySpec. Throws ConfigError on malformed input,
    inconsistent piece/breakpoint counts, degree > 3, bad profile indices,
    or a certified lower bound that is not positive. */
inline GeometrySpec parse_geometry(const nlohmann::json &j) {
    using nlohmann::json;
    if (!j.is_object()) throw ConfigError("geometry: expected an object");
    GeometrySpec s;
    try {
        s.L = j.value("period", 1.0);
        if (!(s.L > 0)) throw ConfigError("geometry: period must be positive");
        if (j.contains("breakpoints")) {
            s.breakpoints = j.at("breakpoints").get<std::vector<double>>();
        }
        if (s.breakpoints.size() < 2 || std::abs(s.breakpoints.front()) > 1e-12 ||
            std::abs(s.breakpoints.back() - 1.0) > 1e-12)
            throw ConfigError("geometry: breakpoints must run from 0 to 1");
        s.breakpoints.front() = 0.0;
        s.breakpoints.back() = 1.0;
        for (std::size_t i = 1; i < s.breakpoints.size(); ++i)
            if (!(s.breakpoints[i] > s.breakpoints[i - 1] + 1e-12))
                throw ConfigError("geometry: breakpoints must be strictly increasing");

        s.profiles.clear();
        if (j.contains("profiles")) {
            for (const auto &pj : j.at("profiles")) {
                FourierProfile p;
                p.c0 = pj.value("c0", 0.0);
                if (pj.contains("cos")) p.cosk = pj.at("cos").get<std::vector<double>>();
                if (pj.contains("sin")) p.sink = pj.at("sin").get<std::vector<double>>();
                s.profiles.push_back(std::move(p));
            }
        }

        auto parse_poly = [](const json &arr, const char *what) {
            auto c = arr.get<std::vector<double>>();
            if (c.empty() || c.size() > 4)
                throw ConfigError(std::string("geometry: ") + what + " must have 1..4 coefficients");
            Poly3 p;
            std::copy(c.begin(), c.end(), p.c.begin());
            return p;
        };

        s.pieces.clear();
        if (!j.contains("pieces")) throw ConfigError("geometry: missing pieces");
        for (const auto &pj : j.at("pieces")) {
            Piece p;
            p.a = parse_poly(pj.at("a"), "piece a");
            if (pj.contains("terms")) {
                for (const auto &tj : pj.at("terms")) {
                    ProfileTerm t;
                    t.poly = parse_poly(tj.at("poly"), "term poly");
                    t.profile = tj.at("profile").get<int>();
                    if (t.profile < 0 || t.profile >= static_cast<int>(s.profiles.size()))
                        throw ConfigError("geometry: term profile index out of range");
                    p.terms.push_back(std::move(t));
                }
            }
            s.pieces.push_back(std::move(p));
        }
        if (s.pieces.size() + 1 != s.breakpoints.size())
            throw ConfigError("geometry: piece count must equal breakpoint count - 1");
    } catch (const json::exception &e) {
        throw ConfigError(std::string("geometry: malformed config: ") + e.what());
    }
    s.certify();
    if (!(s.g0 > 0)) throw ConfigError("geometry: certified lower bound is not positive");
    return s;
}

inline GeometrySpec parse_geometry(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("geometry: invalid JSON: ") + e.what());
    }
    return parse_geometry(j);
}

//! Inverse of parse_geometry, used for config echoes.
inline nlohmann::json geometry_to_json(const GeometrySpec &s) {
    nlohmann::json j;
    j["period"] = s.L;
    j["breakpoints"] = s.breakpoints;
    auto poly_arr = [](const Poly3 &p) {
        std::size_t n = 4;
        while (n > 1 && p.c[n - 1] == 0) --n;
        return std::vector<double>(p.c.begin(), p.c.begin() + n);
    };
    j["profiles"] = nlohmann::json::array();
    for (const auto &p : s.profiles) {
        nlohmann::json pj;
        pj["c0"] = p.c0;
        pj["cos"] = p.cosk;
        pj["sin"] = p.sink;
        j["profiles"].push_back(pj);
    }
    j["pieces"] = nlohmann::json::array();
    for (const auto &p : s.pieces) {
        nlohmann::json pj;
        pj["a"] = poly_arr(p.a);
        pj["terms"] = nlohmann::json::array();
        for (const auto &t : p.terms) {
            pj["terms"].push_back({{"poly", poly_arr(t.poly)}, {"profile", t.profile}});
        }
        j["pieces"].push_back(pj);
    }
    return j;
}

} // namespace thinhomog

#endif
