#pragma once

#include <array>
#include <cmath>
#include <span>

#include "lqocp/common.hpp"

namespace lqocp::quad {

/// Quadrature point in barycentric coordinates; weights sum to 1 and are
/// multiplied by the triangle area.
struct BaryPoint {
    std::array<double, 3> lambda;
    double weight;
};

/// Edge-midpoint rule, exact for polynomials of degree 2.
inline constexpr std::array<BaryPoint, 3> edge_midpoint{{
    {{0.5, 0.5, 0.0}, 1.0 / 3.0},
    {{0.0, 0.5, 0.5}, 1.0 / 3.0},
    {{0.5, 0.0, 0.5}, 1.0 / 3.0},
}};

/// Six-point symmetric rule, exact for polynomials of degree 4.
inline constexpr std::array<BaryPoint, 6> degree4{{
    {{0.108103018168070, 0.445948490915965, 0.445948490915965}, 0.223381589678011},
    {{0.445948490915965, 0.108103018168070, 0.445948490915965}, 0.223381589678011},
    {{0.445948490915965, 0.445948490915965, 0.108103018168070}, 0.223381589678011},
    {{0.816847572980459, 0.091576213509771, 0.091576213509771}, 0.109951743655322},
    {{0.091576213509771, 0.816847572980459, 0.091576213509771}, 0.109951743655322},
    {{0.091576213509771, 0.091576213509771, 0.816847572980459}, 0.109951743655322},
}};

inline Point2 map_point(const std::array<Point2, 3>& c, const std::array<double, 3>& l) {
    return {l[0] * c[0].x + l[1] * c[1].x + l[2] * c[2].x,
            l[0] * c[0].y + l[1] * c[1].y + l[2] * c[2].y};
}

inline double triangle_area(const std::array<Point2, 3>& c) {
    return 0.5 * std::abs((c[1].x - c[0].x) * (c[2].y - c[0].y) -
                          (c[2].x - c[0].x) * (c[1].y - c[0].y));
}

template <std::size_t N, class F>
double integrate(const std::array<Point2, 3>& c, const std::array<BaryPoint, N>& rule, F&& f) {
    double sum = 0.0;
    for (const auto& qp : rule) sum += qp.weight * f(map_point(c, qp.lambda));
    return triangle_area(c) * sum;
}

/// Integral of f over a triangle. Smooth integrands use the degree-4 rule on
/// `smooth_levels` uniform subdivisions; discontinuous ones are subdivided
/// adaptively (up to `jump_levels` times) wherever samples disagree.
double integrate_triangle(const std::array<Point2, 3>& c, const Function2D& f,
                          int smooth_levels = 0, int jump_levels = 4);

/// Same as integrate_triangle but for an arbitrary callable g(p) composed
/// with f's discontinuity hint, e.g. |f - c| or (f - c)^2.
double integrate_composed(const std::array<Point2, 3>& c, const Function2D& f,
                          const std::function<double(double, Point2)>& g, int smooth_levels,
                          int jump_levels);

} // namespace lqocp::quad
