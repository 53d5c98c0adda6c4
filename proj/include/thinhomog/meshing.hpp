#ifndef THINHOMOG_MESHING_HPP
#define THINHOMOG_MESHING_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "common.hpp"
#include "geometry.hpp"

namespace thinhomog {

enum class BoundaryTag { Bottom, Top, Left, Right };

struct BoundaryEdge {
    int a, b;
    BoundaryTag tag;
};

/*! Structured triangulation of a graph domain {0 < x2 < h(x1)}: one vertex
    column per station, uniform layers per column, top vertices exactly on
    the graph. Triangles are CCW; fibers list each column bottom to top. */
struct TriMesh {
    std::vector<std::array<double, 2>> xy;
    std::vector<std::array<int, 3>> tris;
    std::vector<BoundaryEdge> boundary;
    std::vector<std::pair<int, int>> periodic_pairs; // (left vertex, right vertex)

    std::vector<double> fiber_x;          // station abscissae
    std::vector<double> col_height;       // graph height per station
    std::vector<std::vector<int>> fibers; // vertex ids per station, ascending x2
    std::vector<int> tri_col;             // station interval index per triangle

    int n_vertices() const { return static_cast<int>(xy.size()); }
    int n_triangles() const { return static_cast<int>(tris.size()); }

    double tri_area(int t) const {
        const auto &tr = tris[t];
        const auto &p0 = xy[tr[0]], &p1 = xy[tr[1]], &p2 = xy[tr[2]];
        return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
    }
    double total_area() const {
        double a = 0;
        for (int t = 0; t < n_triangles(); ++t) a += tri_area(t);
        return a;
    }
    /*! Gradient of the P1 basis functions on triangle t: rows are
        (d lambda_i / dx1, d lambda_i / dx2). */
    std::array<std::array<double, 2>, 3> shape_gradients(int t) const {
        const auto &tr = tris[t];
        const auto &p0 = xy[tr[0]], &p1 = xy[tr[1]], &p2 = xy[tr[2]];
        const double two_a = 2.0 * tri_area(t);
        return {{{(p1[1] - p2[1]) / two_a, (p2[0] - p1[0]) / two_a},
                 {(p2[1] - p0[1]) / two_a, (p0[0] - p2[0]) / two_a},
                 {(p0[1] - p1[1]) / two_a, (p1[0] - p0[0]) / two_a}}};
    }
};

namespace detail {

/*! Tensor-style triangulation over given stations and per-station heights,
    m uniform layers. Vertex (j,i) gets id j*(m+1)+i. */
inline TriMesh build_graph_mesh(const std::vector<double> &stations,
                                const std::vector<double> &heights, int m) {
    const int nc = static_cast<int>(stations.size()) - 1;
    if (nc < 1 || m < 1) throw ConfigError("mesh: need at least one column and one layer");
    TriMesh mesh;
    mesh.fiber_x = stations;
    mesh.col_height = heights;
    auto vid = [m](int j, int i) { return j * (m + 1) + i; };
    mesh.xy.resize(static_cast<std::size_t>(nc + 1) * (m + 1));
    mesh.fibers.assign(nc + 1, {});
    for (int j = 0; j <= nc; ++j) {
        if (!(heights[j] > 0)) throw ConfigError("mesh: nonpositive column height");
        mesh.fibers[j].resize(m + 1);
        for (int i = 0; i <= m; ++i) {
            // top vertex (i == m) lands exactly on the graph
            double y = (i == m) ? heights[j] : heights[j] * i / m;
            mesh.xy[vid(j, i)] = {stations[j], y};
            mesh.fibers[j][i] = vid(j, i);
        }
    }
    mesh.tris.reserve(static_cast<std::size_t>(2 * nc) * m);
    mesh.tri_col.reserve(static_cast<std::size_t>(2 * nc) * m);
    for (int j = 0; j < nc; ++j) {
        for (int i = 0; i < m; ++i) {
            // alternate the split diagonal per quad parity; the symmetric
            // pattern cancels the leading odd error term of a fixed diagonal
            if ((i + j) % 2 == 0) {
                mesh.tris.push_back({vid(j, i), vid(j + 1, i), vid(j + 1, i + 1)});
                mesh.tris.push_back({vid(j, i), vid(j + 1, i + 1), vid(j, i + 1)});
            } else {
                mesh.tris.push_back({vid(j, i), vid(j + 1, i), vid(j, i + 1)});
                mesh.tris.push_back({vid(j + 1, i), vid(j + 1, i + 1), vid(j, i + 1)});
            }
            mesh.tri_col.push_back(j);
            mesh.tri_col.push_back(j);
        }
    }
    for (int j = 0; j < nc; ++j) {
        mesh.boundary.push_back({vid(j, 0), vid(j + 1, 0), BoundaryTag::Bottom});
        mesh.boundary.push_back({vid(j, m), vid(j + 1, m), BoundaryTag::Top});
    }
    for (int i = 0; i < m; ++i) {
        mesh.boundary.push_back({vid(0, i), vid(0, i + 1), BoundaryTag::Left});
        mesh.boundary.push_back({vid(nc, i), vid(nc, i + 1), BoundaryTag::Right});
    }
    return mesh;
}

} // namespace detail

/*! Mesh of the periodicity cell {0 < y1 < L, 0 < y2 < G(x, y1)} at frozen x:
    n columns and 3n/4 uniform layers. The corrector decays away from the
    top on the scale of the period, independent of the cell height, so the
    layer count tracks n rather than the height; the 3/4 factor balances the
    vertical against the horizontal interpolation error for admissible
    profiles while keeping the system small. The last column copies the
    first column's heights, which makes periodic pairs match exactly. */
inline TriMesh mesh_cell(const GeometrySpec &spec, double x, int n, Side side = Side::Left) {
    if (n < 2) throw ConfigError("mesh_cell: need n >= 2");
    const double L = spec.L;
    std::vector<double> stations(n + 1), heights(n + 1);
    for (int j = 0; j <= n; ++j) {
        stations[j] = L * j / n;
        heights[j] = spec.eval(x, stations[j], side).g;
    }
    heights[n] = heights[0]; // structural periodicity
    const int m = std::max(2, (3 * n) / 4);
    TriMesh mesh = detail::build_graph_mesh(stations, heights, m);
    mesh.periodic_pairs.reserve(m + 1);
    for (int i = 0; i <= m; ++i)
        mesh.periodic_pairs.emplace_back(mesh.fibers[0][i], mesh.fibers[n][i]);
    return mesh;
}

/*! Mesh of the rescaled thin domain {0 < x1 < 1, 0 < x2 < G(x1, x1/eps)}:
    about n_per_period columns per oscillation period, geometry breakpoints
    inserted as stations. A height jump at a breakpoint is smeared linearly
    over the single column interval to its right, keeping the mesh a
    conforming graph mesh. */
inline TriMesh mesh_domain(const GeometrySpec &spec, double epsilon, int n_per_period = 16) {
    if (!(epsilon > 0) || epsilon > 2) throw ConfigError("mesh_domain: epsilon out of range");
    if (n_per_period < 4)
        throw ConfigError("mesh_domain: need at least 4 columns per period");
    const double dx_target = epsilon * spec.L / n_per_period;
    std::vector<double> stations;
    for (std::size_t i = 0; i + 1 < spec.breakpoints.size(); ++i) {
        const double x0 = spec.breakpoints[i], x1 = spec.breakpoints[i + 1];
        const int k = std::max(1, static_cast<int>(std::ceil((x1 - x0) / dx_target)));
        for (int a = 0; a < k; ++a) stations.push_back(x0 + (x1 - x0) * a / k);
    }
    stations.push_back(1.0);

    std::vector<double> heights(stations.size());
    for (std::size_t j = 0; j < stations.size(); ++j) {
        // breakpoint stations take the left limit; the very first takes the right
        Side side = (j == 0) ? Side::Right : Side::Left;
        heights[j] = spec.eval(stations[j], stations[j] / epsilon, side).g;
    }
    const int m = std::max(8, (3 * n_per_period) / 4);
    return detail::build_graph_mesh(stations, heights, m);
}

/*! 1D mesh of [0,1]: n uniform cells with breakpoints and extra points
    inserted exactly, deduplicated. */
struct IntervalMesh {
    std::vector<double> nodes;

    int n_cells() const { return static_cast<int>(nodes.size()) - 1; }
};

inline IntervalMesh mesh_interval(int n, const std::vector<double> &breakpoints = {0.0, 1.0},
                                  const std::vector<double> &extra = {}) {
    if (n < 1) throw ConfigError("mesh_interval: need n >= 1");
    std::vector<double> nodes;
    nodes.reserve(n + breakpoints.size() + extra.size());
    for (int i = 0; i <= n; ++i) nodes.push_back(static_cast<double>(i) / n);
    for (double b : breakpoints) nodes.push_back(b);
    for (double e : extra) nodes.push_back(e);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-13; }),
                nodes.end());
    if (nodes.front() < -1e-13 || nodes.back() > 1 + 1e-13)
        throw ConfigError("mesh_interval: points outside [0,1]");
    nodes.front() = 0.0;
    nodes.back() = 1.0;
    return IntervalMesh{std::move(nodes)};
}

} // namespace thinhomog

#endif
