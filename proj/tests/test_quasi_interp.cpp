#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "lqocp/presets.hpp"
#include "lqocp/quasi_interp.hpp"

using namespace lqocp;

namespace {

const double pi = std::numbers::pi;

// Element of the uniform n x n criss-cross square mesh containing (x, y).
std::size_t locate(int n, double x, double y) {
    const int i = std::min(n - 1, static_cast<int>(x * n));
    const int j = std::min(n - 1, static_cast<int>(y * n));
    const bool lower = (x * n - i) >= (y * n - j);
    return static_cast<std::size_t>(2 * (j * n + i) + (lower ? 0 : 1));
}

Function2D piecewise(const fem::P0Field& u, int n) {
    return Function2D([u, n](double x, double y) { return u.values[locate(n, x, y)]; }, "p0", true);
}

// Midpoint-grid reference for int |u| over the unit square.
double l1_norm_grid(const Function2D& u, int k) {
    double s = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) s += std::abs(u((i + 0.5) / k, (j + 0.5) / k));
    return s / (static_cast<double>(k) * k);
}

std::vector<MeshPtr> ladder(int n, int levels) {
    std::vector<MeshPtr> out{build_uniform_square(n)};
    for (int l = 1; l < levels; ++l) out.push_back(refine_uniform(out.back()));
    return out;
}

} // namespace

TEST(ProjectP0, ConstantsAndAffine) {
    const auto m = build_uniform_square(3);
    for (double v : project_p0(m, Function2D([](double, double) { return -1.25; })).values) EXPECT_NEAR(v, -1.25, 1e-14);
    const auto px = project_p0(m, Function2D([](double x, double) { return x; }));
    for (std::size_t t = 0; t < m->num_triangles(); ++t) EXPECT_NEAR(px.values[t], m->barycenter(t).x, 1e-15);
}

TEST(ProjectP0, IndicatorGivesAreaFraction) {
    const auto m = build_uniform_square(1);
    const Function2D half([](double x, double) { return x < 0.5 ? 1.0 : 0.0; }, "half", true);
    const auto u = project_p0(m, half);
    // Lower triangle (0,0),(1,0),(1,1): the part x < 1/2 is a quarter of it.
    EXPECT_NEAR(u.values[0], 0.25, 1e-12);
    EXPECT_NEAR(u.values[1], 0.75, 1e-12);
}

TEST(ProjectP0, IdempotentOnPiecewiseConstants) {
    const int n = 6;
    const auto m = build_uniform_square(n);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> d(-1, 1);
    fem::P0Field u = fem::P0Field::constant(m, 0.0);
    for (double& v : u.values) v = d(rng);
    const auto again = project_p0(m, piecewise(u, n));
    for (std::size_t t = 0; t < u.values.size(); ++t) EXPECT_NEAR(again.values[t], u.values[t], 1e-14);
}

TEST(ProjectP0, ContractionInL1) {
    const Function2D u([](double x, double y) { return std::sin(3 * pi * x) * std::cos(2 * pi * y) + 0.2; });
    const double ref = l1_norm_grid(u, 2000);
    for (int n : {2, 5, 16}) {
        const auto m = build_uniform_square(n);
        const auto p = project_p0(m, u);
        double norm = 0.0;
        for (std::size_t t = 0; t < p.values.size(); ++t) norm += m->area(t) * std::abs(p.values[t]);
        EXPECT_LE(norm, ref + 1e-6) << "n=" << n;
    }
}

TEST(ProjectP0, PreservesBox) {
    const Function2D u([](double x, double y) {
        return std::clamp(3 * std::sin(7 * x) * std::cos(5 * y), -0.8, 0.55);
    });
    for (double v : project_p0(build_uniform_square(7), u).values) {
        EXPECT_GE(v, -0.8);
        EXPECT_LE(v, 0.55);
    }
}

TEST(WeightedP1, ConstantsAndBoundaryVertex) {
    const auto m = build_uniform_square(2);
    for (double v : weighted_quasi_interp_p1(m, Function2D([](double, double) { return 4.0; })).values)
        EXPECT_NEAR(v, 4.0, 1e-14);
    const auto px = weighted_quasi_interp_p1(m, Function2D([](double x, double) { return x; }));
    // Patch of vertex (0,0): (|T|/12)(0+1/2+1/2) + (|T|/12)(0+1/2+0) over 2|T|/3.
    EXPECT_NEAR(px.values[0], 0.1875, 1e-14);
    EXPECT_NE(px.values[0], m->vertex(0).x);
    // Interior vertex of a symmetric patch reproduces x.
    EXPECT_NEAR(px.values[4], 0.5, 1e-14);
}

TEST(WeightedP1, CoefficientsWithinPatchRange) {
    const auto m = build_uniform_square(5);
    const Function2D u([](double x, double y) { return std::exp(x) * std::sin(4 * y); });
    const auto p = weighted_quasi_interp_p1(m, u);
    for (std::size_t v = 0; v < m->num_vertices(); ++v) {
        double lo = 1e300, hi = -1e300;
        for (std::size_t t = 0; t < m->num_triangles(); ++t) {
            const auto& tri = m->triangle(t);
            if (tri[0] != static_cast<int>(v) && tri[1] != static_cast<int>(v) && tri[2] != static_cast<int>(v)) continue;
            // Sample the element densely for the range of u over the patch.
            const auto c = m->corners(t);
            for (int a = 0; a <= 20; ++a)
                for (int b = 0; a + b <= 20; ++b) {
                    const double l1 = a / 20.0, l2 = b / 20.0, l0 = 1 - l1 - l2;
                    const double val = u(l0 * c[0].x + l1 * c[1].x + l2 * c[2].x, l0 * c[0].y + l1 * c[1].y + l2 * c[2].y);
                    lo = std::min(lo, val);
                    hi = std::max(hi, val);
                }
        }
        EXPECT_GE(p.values[v], lo - 1e-12);
        EXPECT_LE(p.values[v], hi + 1e-12);
    }
}

TEST(Orthogonality, PolynomialsAndSmoothFunctions) {
    const auto m = build_uniform_square(8);
    for (const auto& r : orthogonality_residual(m, Function2D([](double, double) { return 1.0; }))) EXPECT_EQ(r, 0.0);
    const Function2D quartic([](double x, double y) { return x * x * x * y - 3 * y * y * y * y + x * y + 2; });
    for (double r : orthogonality_residual(m, quartic)) EXPECT_LE(std::abs(r), 1e-14);
    const Function2D s([](double x, double) { return std::sin(pi * x); });
    for (double r : orthogonality_residual(m, s)) EXPECT_LE(std::abs(r), 1e-10);
}

TEST(Study, DiskIndicatorRates) {
    const Function2D disk = make_preset("disk-indicator", {});
    EXPECT_TRUE(disk.discontinuous);
    const auto r = interp_error_study(ladder(8, 4), disk);
    for (std::size_t l = 1; l < r.h.size(); ++l) {
        EXPECT_LT(r.h[l], r.h[l - 1]);
        EXPECT_LT(r.error_l1[l], r.error_l1[l - 1]);
    }
    EXPECT_GE(r.exponent_l1, 0.9);
    EXPECT_GE(r.exponent_l2, 0.45);
    EXPECT_EQ(r.exponent(InterpNorm::l2), r.exponent_l2);
}

TEST(Study, SmoothFunctionL1Rate) {
    const Function2D u([](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
    const auto r = interp_error_study(ladder(4, 4), u);
    EXPECT_GE(r.exponent_l1, 0.9);
    for (double e : r.error_l2) EXPECT_GE(e, 0.0);
}

TEST(Study, RejectsShortOrNonDecreasingLadder) {
    const Function2D u([](double x, double) { return x; });
    EXPECT_THROW(interp_error_study(ladder(4, 2), u), InvalidInput);
    auto l = ladder(4, 3);
    std::swap(l[0], l[2]);
    EXPECT_THROW(interp_error_study(l, u), InvalidInput);
}

TEST(Study, CsvLayout) {
    const auto r = interp_error_study(ladder(4, 3), Function2D([](double x, double) { return x * x; }));
    std::ostringstream os;
    write_interp_csv(os, r, InterpNorm::l1);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "level,h,error_L1,error_L2,fitted_exponent");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 3);
}

TEST(FitLogSlope, ExactPowerLaw) {
    EXPECT_NEAR(fit_log_slope({1, 0.5, 0.25}, {3, 0.75, 0.1875}), 2.0, 1e-14);
    EXPECT_THROW(fit_log_slope({1}, {1}), InvalidInput);
}
