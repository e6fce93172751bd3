#include "lqocp/quadrature.hpp"

#include <cmath>

namespace lqocp::quad {

namespace {

std::array<std::array<Point2, 3>, 4> split(const std::array<Point2, 3>& c) {
    const Point2 ab = 0.5 * (c[0] + c[1]);
    const Point2 bc = 0.5 * (c[1] + c[2]);
    const Point2 ca = 0.5 * (c[2] + c[0]);
    return {{{c[0], ab, ca}, {ab, c[1], bc}, {ca, bc, c[2]}, {ab, bc, ca}}};
}

double smooth(const std::array<Point2, 3>& c, const Function2D& f,
              const std::function<double(double, Point2)>& g, int levels) {
    if (levels <= 0)
        return integrate(c, degree4, [&](Point2 p) { return g(f(p), p); });
    double sum = 0.0;
    for (const auto& child : split(c)) sum += smooth(child, f, g, levels - 1);
    return sum;
}

// Refines wherever the 7 samples (corners, edge midpoints, centroid) of f
// disagree; uniform sub-triangles fall back to the degree-4 rule.
double adaptive(const std::array<Point2, 3>& c, const Function2D& f,
                const std::function<double(double, Point2)>& g, int levels) {
    if (levels > 0) {
        const std::array<Point2, 7> samples{c[0],
                                            c[1],
                                            c[2],
                                            0.5 * (c[0] + c[1]),
                                            0.5 * (c[1] + c[2]),
                                            0.5 * (c[2] + c[0]),
                                            (1.0 / 3.0) * (c[0] + c[1] + c[2])};
        const double first = f(samples[0]);
        bool uniform = true;
        for (std::size_t k = 1; k < samples.size() && uniform; ++k)
            uniform = f(samples[k]) == first;
        if (!uniform) {
            double sum = 0.0;
            for (const auto& child : split(c)) sum += adaptive(child, f, g, levels - 1);
            return sum;
        }
    }
    return integrate(c, degree4, [&](Point2 p) { return g(f(p), p); });
}

} // namespace

double integrate_composed(const std::array<Point2, 3>& c, const Function2D& f,
                          const std::function<double(double, Point2)>& g, int smooth_levels,
                          int jump_levels) {
    return f.discontinuous ? adaptive(c, f, g, jump_levels) : smooth(c, f, g, smooth_levels);
}

double integrate_triangle(const std::array<Point2, 3>& c, const Function2D& f, int smooth_levels,
                          int jump_levels) {
    return integrate_composed(c, f, [](double v, Point2) { return v; }, smooth_levels,
                              jump_levels);
}

} // namespace lqocp::quad
