#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lqocp/fem.hpp"
#include "lqocp/quasi_interp.hpp"
#include "oracles.hpp"

using namespace lqocp;
using namespace lqocp::fem;

namespace {

const double pi = std::numbers::pi;

// Value of a P1 field at p by searching the containing triangle.
double eval_p1(const P1Field& y, Point2 p) {
    const TriMesh& m = *y.mesh;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        const auto c = m.corners(t);
        const auto& tri = m.triangle(t);
        std::array<double, 3> l{};
        const double den = (c[1].y - c[2].y) * (c[0].x - c[2].x) + (c[2].x - c[1].x) * (c[0].y - c[2].y);
        l[0] = ((c[1].y - c[2].y) * (p.x - c[2].x) + (c[2].x - c[1].x) * (p.y - c[2].y)) / den;
        l[1] = ((c[2].y - c[0].y) * (p.x - c[2].x) + (c[0].x - c[2].x) * (p.y - c[2].y)) / den;
        l[2] = 1.0 - l[0] - l[1];
        if (l[0] >= -1e-12 && l[1] >= -1e-12 && l[2] >= -1e-12)
            return l[0] * y.values[tri[0]] + l[1] * y.values[tri[1]] + l[2] * y.values[tri[2]];
    }
    throw std::runtime_error("point outside mesh");
}

Function2D as_function(const P1Field& y) {
    return Function2D([y](double a, double b) { return eval_p1(y, {a, b}); }, "p1");
}

SparseSpd from_dense(const oracle::Dense& a) {
    const auto n = static_cast<Eigen::Index>(a.size());
    SparseMatrix s(n, n);
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (a[i][j] != 0.0) trip.emplace_back(i, j, a[i][j]);
    s.setFromTriplets(trip.begin(), trip.end());
    return {s};
}

P0Field random_p0(const MeshPtr& m, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    P0Field u = P0Field::constant(m, 0.0);
    for (double& v : u.values) v = d(rng);
    return u;
}

} // namespace

TEST(Stiffness, SingleInteriorDofAtTwo) {
    const auto m = build_uniform_square(2);
    const SparseSpd a = assemble_stiffness(*m);
    ASSERT_EQ(a.size(), 1);
    EXPECT_NEAR(a.matrix.coeff(0, 0), 4.0, 1e-14);
}

TEST(Stiffness, MatchesFivePointStencil) {
    const oracle::DenseProblem dense(6);
    const SparseSpd a = assemble_stiffness(*build_uniform_square(6));
    for (int i = 0; i < dense.ndof; ++i)
        for (int j = 0; j < dense.ndof; ++j) EXPECT_NEAR(a.matrix.coeff(i, j), dense.k[i][j], 1e-13);
}

TEST(Stiffness, ConstantsInKernel) {
    const auto m = build_uniform_square(5);
    const SparseMatrix full = assemble_stiffness_full(*m);
    const Vector ones = Vector::Ones(full.cols());
    EXPECT_LT((full * ones).cwiseAbs().maxCoeff(), 1e-13);
    // Also for a smooth anisotropic coefficient.
    EllipticCoeffs c;
    c.a = [](Point2 p) { return Sym2{2.0 + p.x, 0.3 * p.y, 1.0 + p.y * p.y}; };
    const SparseMatrix fa = assemble_stiffness_full(*m, c);
    EXPECT_LT((fa * ones).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((SparseMatrix(fa.transpose()) - fa).norm(), 1e-14);
}

TEST(Stiffness, ReactionTermAddsMassMatrix) {
    const auto m = build_uniform_square(4);
    EllipticCoeffs c;
    c.c0 = [](Point2) { return 1.0; };
    const SparseMatrix diff = assemble_stiffness_full(*m, c) - assemble_stiffness_full(*m);
    const SparseMatrix mass = assemble_mass_full(*m);
    EXPECT_LT((diff - mass).norm(), 1e-15);
    EXPECT_NEAR(Vector::Ones(mass.rows()).dot(mass * Vector::Ones(mass.rows())), 1.0, 1e-14);
}

TEST(Stiffness, RejectsNonEllipticWithPosition) {
    const auto m = build_uniform_square(2);
    EllipticCoeffs c;
    c.a = [](Point2 p) { return p.x > 0.6 ? Sym2{1.0, 2.0, 1.0} : Sym2{}; };
    try {
        (void)assemble_stiffness(*m, c);
        FAIL() << "expected InvalidInput";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("elliptic at"), std::string::npos);
    }
    EllipticCoeffs neg;
    neg.c0 = [](Point2) { return -1.0; };
    EXPECT_THROW((void)assemble_stiffness(*m, neg), InvalidInput);
}

TEST(Load, ZeroAndUnitControls) {
    const auto m = build_uniform_square(2);
    EXPECT_EQ(assemble_p0_load(P0Field::constant(m, 0.0)).norm(), 0.0);
    const Vector b = assemble_p0_load(P0Field::constant(m, 1.0));
    ASSERT_EQ(b.size(), 1);
    // Six triangles of area 1/8 meet at the centre vertex.
    EXPECT_NEAR(b[0], (1.0 / 3.0) * (6.0 * (1.0 / 8.0)), 1e-15);
    EXPECT_NEAR(b[0], 0.25, 1e-15);
}

TEST(Load, PatchAreaOverThree) {
    const auto m = build_uniform_square(5);
    const Vector b = assemble_p0_load(P0Field::constant(m, 1.0));
    const DofMap dofs = DofMap::interior(*m);
    std::vector<double> patch(m->num_vertices(), 0.0);
    for (std::size_t t = 0; t < m->num_triangles(); ++t)
        for (int v : m->triangle(t)) patch[v] += m->area(t);
    for (std::size_t i = 0; i < dofs.size(); ++i)
        EXPECT_NEAR(b[static_cast<Eigen::Index>(i)], patch[dofs.dof_to_vertex[i]] / 3.0, 1e-15);
    EXPECT_THROW(assemble_p0_load(*m, std::vector<double>(3, 0.0)), InvalidInput);
}

TEST(SolveSpd, TrivialCases) {
    const SparseSpd a = assemble_stiffness(*build_uniform_square(6));
    EXPECT_EQ(solve_spd(a, Vector::Zero(a.size())).norm(), 0.0);
    SparseMatrix id(7, 7);
    id.setIdentity();
    Vector b(7);
    b << 1, -2, 3, 0.5, 0, 9, -1;
    EXPECT_LT((solve_spd({id}, b) - b).norm(), 1e-15);
}

TEST(SolveSpd, RandomSystemMatchesDenseCholesky) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    const std::size_t n = 50;
    oracle::Dense b = oracle::zeros(n, n), a = oracle::zeros(n, n);
    for (auto& row : b)
        for (double& v : row) v = g(rng);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) a[i][j] += b[k][i] * b[k][j];
            if (i == j) a[i][j] += 1.0;
        }
    std::vector<double> rhs(n);
    for (double& v : rhs) v = g(rng);
    const auto ref = oracle::cholesky_solve(oracle::cholesky(a), rhs);
    SolveStats stats;
    const Vector x = solve_spd(from_dense(a), Eigen::Map<Vector>(rhs.data(), n), 1e-12, &stats);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err += (x[i] - ref[i]) * (x[i] - ref[i]);
    EXPECT_LE(std::sqrt(err), 1e-9);
    EXPECT_LE(stats.relative_residual, 1e-12);
}

TEST(SolveSpd, IterationCapCarriesResidual) {
    const SparseSpd a = assemble_stiffness(*build_uniform_square(16));
    const Vector b = Vector::Ones(a.size());
    try {
        (void)solve_spd(a, b, 0.0);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_GE(e.residual(), 0.0);
        EXPECT_LT(e.residual(), 1e-10);
    }
}

TEST(SolveSpd, DeterministicAndMatchesDirect) {
    const auto m = build_uniform_square(20);
    const EllipticSolver direct(m), pcg(m, {}, LinearSolverKind::pcg);
    const Vector b = assemble_p0_load(P0Field::constant(m, 1.0));
    const Vector x1 = pcg.solve(b), x2 = pcg.solve(b);
    EXPECT_EQ(x1, x2);
    EXPECT_LT((x1 - direct.solve(b)).norm() / x1.norm(), 1e-10);
}

TEST(State, ZeroDataAndEmptyDofs) {
    const auto m = build_uniform_square(6);
    const P1Field y = solve_state(m, P0Field::constant(m, 0.0));
    for (double v : y.values) EXPECT_EQ(v, 0.0);
    const auto m1 = build_uniform_square(1);
    const P1Field y1 = solve_state(m1, P0Field::constant(m1, 3.0),
                                   Function2D([](double, double) { return 1.0; }));
    for (double v : y1.values) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(solve_state(m, P0Field::constant(m1, 0.0)), InvalidInput);
}

TEST(State, ManufacturedSolutionRate) {
    const Function2D f([](double x, double y) { return 2 * pi * pi * std::sin(pi * x) * std::sin(pi * y); });
    const Function2D exact([](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
    std::vector<double> h, e;
    auto m = build_uniform_square(8);
    for (int l = 0; l < 4; ++l) {
        const P1Field y = solve_state(m, P0Field::constant(m, 0.0), f);
        EXPECT_TRUE(y.vanishes_on_boundary());
        h.push_back(m->mesh_size());
        e.push_back(l2_error(y, exact));
        m = refine_uniform(m);
    }
    EXPECT_NEAR(fit_log_slope(h, e), 2.0, 0.15);
}

TEST(Adjoint, VanishesWhenStateMatchesTarget) {
    const auto m = build_uniform_square(4);
    std::mt19937_64 rng(3);
    const P1Field y = solve_state(m, random_p0(m, rng));
    const P1Field phi = solve_adjoint(m, y, as_function(y));
    for (double v : phi.values) EXPECT_NEAR(v, 0.0, 1e-13);
}

TEST(Adjoint, SelfAdjointOperator) {
    const auto m = build_uniform_square(4);
    std::mt19937_64 rng(4);
    const P1Field g = solve_state(m, random_p0(m, rng));
    const P1Field from_data = solve_adjoint(m, g, {});
    const P1Field from_source = solve_state(m, P0Field::constant(m, 0.0), as_function(g));
    for (std::size_t v = 0; v < m->num_vertices(); ++v)
        EXPECT_NEAR(from_data.values[v], from_source.values[v], 1e-13);
}

TEST(Adjoint, CentreValueApproachesSeries) {
    const double w = oracle::torsion_series(0.5, 0.5);
    EXPECT_NEAR(-w, -0.07367, 5e-6);
    const Function2D one([](double, double) { return 1.0; });
    double prev = 1.0;
    for (int n : {8, 16, 32, 64}) {
        const auto m = build_uniform_square(n);
        const P1Field phi = solve_adjoint(m, P1Field::zeros(m), one);
        const std::size_t centre = static_cast<std::size_t>((n / 2) * (n + 1) + n / 2);
        ASSERT_EQ(m->vertex(centre).x, 0.5);
        ASSERT_EQ(m->vertex(centre).y, 0.5);
        const double err = std::abs(phi.values[centre] + w);
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LT(prev, 1e-4);
}

TEST(Adjoint, ConsistencyOfSolutionOperators) {
    const auto m = build_uniform_square(12);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 5; ++k) {
        const P0Field u = random_p0(m, rng), v = random_p0(m, rng);
        const P1Field su = solve_state(m, u);
        const P1Field sv = solve_state(m, v);  // S_h* v for the symmetric operator
        EXPECT_NEAR(l2_inner(su, v), l2_inner(u, sv), 1e-10);
    }
}

TEST(State, DiscreteMaximumPrinciple) {
    const auto m = build_uniform_square(16);
    std::mt19937_64 rng(6);
    const P1Field y = solve_state(m, random_p0(m, rng, 0.0, 1.0),
                                  Function2D([](double x, double) { return x; }));
    for (double v : y.values) EXPECT_GE(v, 0.0);
}

TEST(State, StabilityRatioBounded) {
    std::vector<double> ratio;
    auto m = build_uniform_square(4);
    for (int l = 0; l < 4; ++l) {
        P0Field u = P0Field::constant(m, 0.0);
        for (std::size_t t = 0; t < m->num_triangles(); ++t) u.values[t] = m->barycenter(t).x > 0.5 ? 1.0 : -0.5;
        const EllipticSolver s(m);
        const Vector y = s.solve(assemble_p0_load(u));
        const double h1 = std::sqrt(y.dot(s.stiffness().matrix * y) + y.dot(s.mass().matrix * y));
        ratio.push_back(h1 / l2_norm(u));
        m = refine_uniform(m);
    }
    const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
    EXPECT_LT(*hi / *lo, 1.5);
}

TEST(ElementAverage, Basics) {
    const auto m = build_uniform_square(3);
    P1Field c{m, std::vector<double>(m->num_vertices(), 2.5)};
    for (double v : element_average(c).values) EXPECT_DOUBLE_EQ(v, 2.5);
    P1Field x = P1Field::zeros(m);
    for (std::size_t v = 0; v < m->num_vertices(); ++v) x.values[v] = m->vertex(v).x;
    const P0Field ax = element_average(x);
    for (std::size_t t = 0; t < m->num_triangles(); ++t) EXPECT_NEAR(ax.values[t], m->barycenter(t).x, 1e-15);
    const auto one = std::make_shared<const TriMesh>(Rectangle{}, std::vector<Point2>{{0, 0}, {1, 0}, {0, 1}},
                                                     std::vector<TriMesh::Triangle>{{0, 1, 2}}, 0, nullptr,
                                                     std::vector<int>{}, 999);
    EXPECT_DOUBLE_EQ(element_average(P1Field{one, {0.0, 1.0, 2.0}}).values[0], 1.0);
}

TEST(Norms, ExactGramEvaluations) {
    const auto m = build_uniform_square(4);
    EXPECT_EQ(l2_norm(P0Field::constant(m, 0.0)), 0.0);
    EXPECT_NEAR(l2_norm(P0Field::constant(m, -3.0)), 3.0, 1e-14);
    for (std::size_t v : {0ul, 6ul, 12ul}) {
        P1Field hat = P1Field::zeros(m);
        hat.values[v] = 1.0;
        double patch = 0.0;
        for (std::size_t t = 0; t < m->num_triangles(); ++t)
            for (int w : m->triangle(t))
                if (static_cast<std::size_t>(w) == v) patch += m->area(t) / 6.0;
        EXPECT_NEAR(l2_inner(hat, hat), patch, 1e-16);
        // int hat = patch area / 3.
        EXPECT_NEAR(l2_inner(hat, P0Field::constant(m, 1.0)), 2.0 * patch, 1e-16);
    }
}

TEST(Norms, AcrossRefinementLineage) {
    const auto c = build_uniform_square(3);
    const auto f = refine_uniform(refine_uniform(c));
    std::mt19937_64 rng(8);
    const P0Field u = random_p0(c, rng);
    EXPECT_NEAR(l2_norm(prolong(u, f)), l2_norm(u), 1e-14);
    const P1Field y = solve_state(c, u);
    const P1Field yf = prolong(y, f);
    EXPECT_NEAR(l2_inner(y, yf), l2_inner(y, y), 1e-14);
    EXPECT_NEAR(l2_inner(y, u), l2_inner(yf, prolong(u, f)), 1e-14);
    // Prolonged P1 values agree with point evaluation.
    for (std::size_t v = 0; v < f->num_vertices(); v += 7)
        EXPECT_NEAR(yf.values[v], eval_p1(y, f->vertex(v)), 1e-14);
    EXPECT_THROW(l2_inner(u, P0Field::constant(build_uniform_square(3), 1.0)), InvalidInput);
}

TEST(Errors, H1RateOfManufacturedSolution) {
    const Function2D f([](double x, double y) { return 2 * pi * pi * std::sin(pi * x) * std::sin(pi * y); });
    auto grad = [](Point2 p) {
        return std::array<double, 2>{pi * std::cos(pi * p.x) * std::sin(pi * p.y),
                                     pi * std::sin(pi * p.x) * std::cos(pi * p.y)};
    };
    std::vector<double> h, e;
    auto m = build_uniform_square(8);
    for (int l = 0; l < 4; ++l) {
        const P1Field y = solve_state(m, P0Field::constant(m, 0.0), f);
        h.push_back(m->mesh_size());
        e.push_back(h1_seminorm_error(y, grad));
        m = refine_uniform(m);
    }
    EXPECT_NEAR(fit_log_slope(h, e), 1.0, 0.15);
}
