/*! Assembly, constraints, Krylov solvers, boundary loads, and the exact
    norm/integration helpers on P1 graph meshes. */

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "thinhomog/fem.hpp"
#include "thinhomog/geometry.hpp"
#include "thinhomog/meshing.hpp"

using namespace thinhomog;

namespace {

TriMesh unit_right_triangle() {
    TriMesh mesh;
    mesh.xy = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    mesh.tris = {{0, 1, 2}};
    mesh.tri_col = {0};
    mesh.fiber_x = {0.0, 1.0};
    return mesh;
}

std::vector<std::vector<double>> to_dense(const CSR &m) {
    std::vector<std::vector<double>> d(m.n, std::vector<double>(m.n, 0.0));
    for (int i = 0; i < m.n; ++i)
        for (int k = m.ia[i]; k < m.ia[i + 1]; ++k) d[i][m.ja[k]] += m.a[k];
    return d;
}

} // namespace

TEST(Fem, UnitTriangleStiffness) {
    const TriMesh mesh = unit_right_triangle();
    const Assembled sys = assemble_operator(mesh, 1.0, 1.0, 0.0);
    const auto K = to_dense(CSR::from_triplets(3, sys.trips));
    const double want[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(K[i][j], want[i][j], 1e-14);
}

TEST(Fem, StiffnessAnnihilatesConstants) {
    const GeometrySpec s = GeometrySpec::sinusoid(2.0, 1.0);
    const TriMesh mesh = mesh_cell(s, 0.3, 8);
    const Assembled sys = assemble_operator(mesh, 1.0, 1.0, 0.0);
    const CSR K = CSR::from_triplets(sys.nv, sys.trips);
    std::vector<double> ones(sys.nv, 1.0), y(sys.nv);
    K.matvec(ones, y);
    for (double v : y) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Fem, MassMatrixReproducesArea) {
    const GeometrySpec s = GeometrySpec::sinusoid(2.0, 1.0);
    const TriMesh mesh = mesh_cell(s, 0.3, 8);
    const Assembled sys = assemble_operator(mesh, 0.0, 0.0, 1.0);
    const CSR M = CSR::from_triplets(sys.nv, sys.trips);
    std::vector<double> ones(sys.nv, 1.0), y(sys.nv);
    M.matvec(ones, y);
    const double total = std::accumulate(y.begin(), y.end(), 0.0);
    EXPECT_NEAR(total, mesh.total_area(), 1e-12);

    const FieldP1 u = FieldP1::nodal(mesh, [](double, double) { return 1.0; });
    EXPECT_NEAR(integrate(mesh, u), mesh.total_area(), 1e-12);
}

TEST(Fem, AnisotropicWeightsEnterQuadraticForm) {
    const TriMesh mesh = mesh_cell(GeometrySpec::constant(1.0), 0.5, 8);
    const FieldP1 u = FieldP1::nodal(mesh, [](double, double y) { return y; });
    const Assembled sys = assemble_operator(mesh, 3.0, 5.0, 0.0);
    const CSR K = CSR::from_triplets(sys.nv, sys.trips);
    std::vector<double> y(sys.nv);
    K.matvec(u.coeffs, y);
    // grad u = (0, 1): energy = w2 * area
    EXPECT_NEAR(detail::dot(u.coeffs, y), 5.0 * mesh.total_area(), 1e-12);
}

TEST(Fem, VariableCoefficientAssemblyMatchesConstant) {
    const TriMesh mesh = mesh_cell(GeometrySpec::sinusoid(2.0, 1.0), 0.3, 8);
    const Assembled a = assemble_operator(mesh, 1.7, 0.4, 0.0);
    const Assembled b = assemble_operator_variable(
        mesh, [](double, double) -> std::array<double, 3> { return {1.7, 0.0, 0.4}; }, 0.0);
    const CSR Ka = CSR::from_triplets(a.nv, a.trips);
    const CSR Kb = CSR::from_triplets(b.nv, b.trips);
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(a.nv), ya(a.nv), yb(a.nv);
    for (double &v : x) v = dist(rng);
    Ka.matvec(x, ya);
    Kb.matvec(x, yb);
    for (int i = 0; i < a.nv; ++i) EXPECT_NEAR(ya[i], yb[i], 1e-12);
}

TEST(Fem, TopLoadFlatIsExactlyZero) {
    const GeometrySpec s = GeometrySpec::constant(2.0);
    const TriMesh mesh = mesh_cell(s, 0.5, 16);
    for (double v : top_neumann_load(mesh, s, 0.5)) EXPECT_EQ(v, 0.0);
}

TEST(Fem, TopLoadIsCompatible) {
    // the datum -G' integrates to zero over a full period
    const GeometrySpec s = GeometrySpec::sinusoid(2.0, 1.0);
    const TriMesh mesh = mesh_cell(s, 0.5, 32);
    const auto load = top_neumann_load(mesh, s, 0.5);
    EXPECT_NEAR(std::accumulate(load.begin(), load.end(), 0.0), 0.0, 1e-12);
    double linf = 0;
    for (double v : load) linf = std::max(linf, std::abs(v));
    EXPECT_GT(linf, 0.0);
}

TEST(Fem, TopLoadMirrorAntisymmetry) {
    const GeometrySpec plus = GeometrySpec::sinusoid(2.0, 1.0);
    const GeometrySpec minus = GeometrySpec::sinusoid(2.0, -1.0);
    const TriMesh mp = mesh_cell(plus, 0.5, 16);
    const TriMesh mm = mesh_cell(minus, 0.5, 16);
    const auto lp = top_neumann_load(mp, plus, 0.5);
    const auto lm = top_neumann_load(mm, minus, 0.5);
    ASSERT_EQ(lp.size(), lm.size());
    for (std::size_t i = 0; i < lp.size(); ++i) EXPECT_DOUBLE_EQ(lm[i], -lp[i]);
}

TEST(Fem, ConstrainIdentityWhenUnconstrained) {
    const TriMesh mesh = mesh_cell(GeometrySpec::constant(1.0), 0.5, 4);
    Assembled sys = assemble_operator(mesh, 1.0, 1.0, 1.0);
    add_load_function(sys, mesh, [](double x, double) { return x; });
    const ConstrainedSystem cs = constrain(sys, mesh, false, false);
    EXPECT_EQ(cs.n_dofs, sys.nv);
    EXPECT_EQ(cs.matrix.n, sys.nv);
    for (int v = 0; v < sys.nv; ++v) EXPECT_EQ(cs.dof_of_vertex[v], v);
    for (int v = 0; v < sys.nv; ++v) EXPECT_DOUBLE_EQ(cs.rhs[v], sys.rhs[v]);
}

TEST(Fem, ConstrainMergesPeriodicPairs) {
    const TriMesh mesh = mesh_cell(GeometrySpec::sinusoid(2.0, 1.0), 0.5, 8);
    const int m = static_cast<int>(mesh.fibers[0].size()) - 1;
    const Assembled sys = assemble_operator(mesh, 1.0, 1.0, 0.0);
    const ConstrainedSystem cs = constrain(sys, mesh, true, false);
    EXPECT_EQ(cs.n_dofs, sys.nv - (m + 1));
    EXPECT_EQ(cs.matrix.n, cs.n_dofs);
    for (const auto &[l, r] : mesh.periodic_pairs)
        EXPECT_EQ(cs.dof_of_vertex[l], cs.dof_of_vertex[r]);

    const ConstrainedSystem czm = constrain(sys, mesh, true, true);
    EXPECT_EQ(czm.matrix.n, czm.n_dofs + 1); // mean constraint adds one multiplier row
    EXPECT_TRUE(czm.zero_mean);
}

TEST(Fem, SolveMassProjectionOfConstant) {
    const TriMesh mesh = mesh_cell(GeometrySpec::sinusoid(2.0, 1.0), 0.3, 8);
    Assembled sys = assemble_operator(mesh, 0.0, 0.0, 1.0);
    add_load_function(sys, mesh, [](double, double) { return 1.0; });
    const ConstrainedSystem cs = constrain(sys, mesh, false, false);
    const auto [u, stats] = solve(cs, 1e-12);
    for (int v = 0; v < mesh.n_vertices(); ++v) EXPECT_NEAR(u.at(v), 1.0, 1e-9);
    EXPECT_LE(stats.relres, 1e-12);
}

TEST(Fem, SolveReachesRequestedResidual) {
    const GeometrySpec s = GeometrySpec::sinusoid(2.0, 1.0);
    const TriMesh mesh = mesh_cell(s, 0.5, 16);
    Assembled sys = assemble_operator(mesh, 1.0, 1.0, 0.0);
    add_load_vector(sys, top_neumann_load(mesh, s, 0.5));
    const ConstrainedSystem cs = constrain(sys, mesh, true, true);
    const auto [u, stats] = solve(cs, 1e-10);

    std::vector<double> x(cs.matrix.n, 0.0), y(cs.matrix.n);
    for (std::size_t i = 0; i < u.coeffs.size(); ++i) x[i] = u.coeffs[i];
    x[cs.n_dofs] = stats.multiplier;
    cs.matrix.matvec(x, y);
    double rn = 0, bn = 0;
    for (int i = 0; i < cs.matrix.n; ++i) {
        rn += (cs.rhs[i] - y[i]) * (cs.rhs[i] - y[i]);
        bn += cs.rhs[i] * cs.rhs[i];
    }
    EXPECT_LE(std::sqrt(rn / bn), 1e-10);
    EXPECT_GT(stats.iterations, 0);
}

TEST(Fem, SolveZeroLoadReturnsZeroInstantly) {
    const GeometrySpec s = GeometrySpec::constant(2.0);
    const TriMesh mesh = mesh_cell(s, 0.5, 8);
    Assembled sys = assemble_operator(mesh, 1.0, 1.0, 0.0);
    add_load_vector(sys, top_neumann_load(mesh, s, 0.5));
    const ConstrainedSystem cs = constrain(sys, mesh, true, true);
    const auto [u, stats] = solve(cs, 1e-10);
    EXPECT_EQ(stats.iterations, 0);
    for (double v : u.coeffs) EXPECT_EQ(v, 0.0);
}

TEST(Fem, SolverThrowsAtIterationCap) {
    const GeometrySpec s = GeometrySpec::sinusoid(2.0, 1.0);
    const TriMesh mesh = mesh_cell(s, 0.5, 16);
    Assembled sys = assemble_operator(mesh, 1.0, 1.0, 1.0);
    add_load_function(sys, mesh, [](double x, double) { return x; });
    const ConstrainedSystem cs = constrain(sys, mesh, false, false);
    EXPECT_THROW(solve(cs, 1e-10, 2), SolverError);
}

TEST(Fem, SolveValidatesTolerance) {
    const TriMesh mesh = mesh_cell(GeometrySpec::constant(1.0), 0.5, 4);
    Assembled sys = assemble_operator(mesh, 1.0, 1.0, 1.0);
    const ConstrainedSystem cs = constrain(sys, mesh, false, false);
    EXPECT_THROW(solve(cs, 0.0), ConfigError);
    EXPECT_THROW(solve(cs, 1e-3), ConfigError);
}

TEST(Fem, NormPartsOfLinearField) {
    const TriMesh mesh = mesh_cell(GeometrySpec::constant(1.0), 0.5, 8);
    const FieldP1 u = FieldP1::nodal(mesh, [](double, double y) { return y; });
    const NormParts parts = norm_parts(mesh, u);
    EXPECT_NEAR(parts.l2sq, 1.0 / 3.0, 1e-13);
    EXPECT_NEAR(parts.d1sq, 0.0, 1e-14);
    EXPECT_NEAR(parts.d2sq, 1.0, 1e-13);
    EXPECT_NEAR(parts.h1_eps_sq(0.5), 1.0 / 3.0 + 4.0, 1e-12);
    EXPECT_NEAR(h1_eps_norm_sq(mesh, u, 0.5), parts.h1_eps_sq(0.5), 1e-14);
}

TEST(Fem, NormPartsWherePredicateFilters) {
    const TriMesh mesh = mesh_cell(GeometrySpec::constant(1.0), 0.5, 8);
    const FieldP1 u = FieldP1::nodal(mesh, [](double, double) { return 1.0; });
    const NormParts left = norm_parts_where(
        mesh, u, [&](int t) { return mesh.tri_col[t] < 4; });
    EXPECT_NEAR(left.l2sq, 0.5, 1e-13); // half of the columns of a unit-area cell
}

TEST(Fem, ClippedNormsIntegrateStripsExactly) {
    const TriMesh mesh = mesh_cell(GeometrySpec::constant(1.0), 0.5, 8);
    const std::vector<double> cut(mesh.fiber_x.size(), 0.75);

    const FieldP1 one = FieldP1::nodal(mesh, [](double, double) { return 1.0; });
    EXPECT_NEAR(norm_parts_clipped(mesh, one, cut, true).l2sq, 0.25, 1e-12);
    EXPECT_NEAR(norm_parts_clipped(mesh, one, cut, false).l2sq, 0.75, 1e-12);

    const FieldP1 lin = FieldP1::nodal(mesh, [](double, double y) { return y; });
    const NormParts above = norm_parts_clipped(mesh, lin, cut, true);
    EXPECT_NEAR(above.l2sq, (1.0 - 0.75 * 0.75 * 0.75) / 3.0, 1e-12);
    EXPECT_NEAR(above.d2sq, 0.25, 1e-12);

    std::vector<double> bad(mesh.fiber_x.size() - 1, 0.5);
    EXPECT_THROW(norm_parts_clipped(mesh, one, bad, true), std::invalid_argument);
}

TEST(Fem, QuadratureNormAndLoadPairing) {
    const TriMesh mesh = mesh_cell(GeometrySpec::constant(2.0), 0.5, 8);
    EXPECT_NEAR(l2sq_quadrature(mesh, [](double, double) { return 3.0; }),
                9.0 * mesh.total_area(), 1e-12);

    Assembled sys = assemble_operator(mesh, 0.0, 0.0, 1.0);
    add_load_function(sys, mesh, [](double x, double) { return x; });
    const FieldP1 u = FieldP1::nodal(mesh, [](double, double) { return 1.0; });
    // l(1) = int x over the cell of height 2 on (0,1): exactly 1
    EXPECT_NEAR(pair_load(sys.rhs, u), 1.0, 1e-12);
}

TEST(Fem, SubtractChecksLayoutAndSubtracts) {
    const TriMesh mesh = mesh_cell(GeometrySpec::constant(1.0), 0.5, 4);
    const FieldP1 a = FieldP1::nodal(mesh, [](double x, double y) { return x + y; });
    const FieldP1 b = FieldP1::nodal(mesh, [](double x, double) { return x; });
    const FieldP1 c = subtract(a, b);
    for (int v = 0; v < mesh.n_vertices(); ++v) EXPECT_NEAR(c.at(v), mesh.xy[v][1], 1e-15);

    FieldP1 other = b;
    other.coeffs.pop_back();
    other.dof_of_vertex.pop_back();
    EXPECT_THROW(subtract(a, other), std::invalid_argument);
}
