#include "lqocp/quasi_interp.hpp"

#include <cmath>
#include <ostream>

#include "lqocp/io.hpp"
#include "lqocp/quadrature.hpp"

namespace lqocp {

namespace {

// Barycentric coordinate k of p in the triangle with corners c.
double barycentric(const std::array<Point2, 3>& c, int k, Point2 p) {
    const Point2 a = c[(k + 1) % 3], b = c[(k + 2) % 3];
    const double num = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
    const double den = (b.x - a.x) * (c[k].y - a.y) - (c[k].x - a.x) * (b.y - a.y);
    return num / den;
}

} // namespace

fem::P0Field project_p0(const MeshPtr& mesh, const Function2D& u) {
    fem::P0Field out = fem::P0Field::constant(mesh, 0.0);
    if (u.is_zero()) return out;
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t)
        out.values[t] = quad::integrate_triangle(mesh->corners(t), u, 1) / mesh->area(t);
    return out;
}

fem::P1Field weighted_quasi_interp_p1(const MeshPtr& mesh, const Function2D& u) {
    std::vector<double> num(mesh->num_vertices(), 0.0);
    std::vector<double> den(mesh->num_vertices(), 0.0);
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
        const auto c = mesh->corners(t);
        const auto& tri = mesh->triangle(t);
        for (int k = 0; k < 3; ++k) {
            num[tri[k]] += quad::integrate_composed(
                c, u, [&](double v, Point2 p) { return v * barycentric(c, k, p); }, 0, 4);
            den[tri[k]] += mesh->area(t) / 3.0;
        }
    }
    fem::P1Field out = fem::P1Field::zeros(mesh);
    for (std::size_t v = 0; v < num.size(); ++v) out.values[v] = num[v] / den[v];
    return out;
}

std::vector<double> orthogonality_residual(const MeshPtr& mesh, const Function2D& u) {
    const fem::P0Field pu = project_p0(mesh, u);
    std::vector<double> out(mesh->num_triangles());
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
        const double fine = quad::integrate_triangle(mesh->corners(t), u, 3, 6);
        out[t] = fine - mesh->area(t) * pu.values[t];
    }
    return out;
}

double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw InvalidInput("fit_log_slope: need at least two matching samples");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

InterpStudyResult interp_error_study(const std::vector<MeshPtr>& ladder, const Function2D& u) {
    if (ladder.size() < 3) throw InvalidInput("interp_error_study: need at least 3 levels");
    InterpStudyResult r;
    for (std::size_t l = 0; l < ladder.size(); ++l) {
        const MeshPtr& mesh = ladder[l];
        if (l > 0 && !(mesh->mesh_size() < ladder[l - 1]->mesh_size()))
            throw InvalidInput("interp_error_study: mesh sizes must strictly decrease");
        const fem::P0Field pu = project_p0(mesh, u);
        double e1 = 0.0, e2 = 0.0;
        for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
            const auto c = mesh->corners(t);
            const double ut = pu.values[t];
            e1 += quad::integrate_composed(
                c, u, [ut](double v, Point2) { return std::abs(v - ut); }, 1, 4);
            e2 += quad::integrate_composed(
                c, u, [ut](double v, Point2) { return (v - ut) * (v - ut); }, 1, 4);
        }
        r.levels.push_back(static_cast<int>(l));
        r.h.push_back(mesh->mesh_size());
        r.error_l1.push_back(e1);
        r.error_l2.push_back(std::sqrt(e2));
    }
    r.exponent_l1 = fit_log_slope(r.h, r.error_l1);
    r.exponent_l2 = fit_log_slope(r.h, r.error_l2);
    return r;
}

void write_interp_csv(std::ostream& os, const InterpStudyResult& r, InterpNorm norm) {
    os << "level,h,error_L1,error_L2,fitted_exponent\n";
    for (std::size_t l = 0; l < r.h.size(); ++l)
        os << r.levels[l] << ',' << io::fmt17(r.h[l]) << ',' << io::fmt17(r.error_l1[l]) << ','
           << io::fmt17(r.error_l2[l]) << ',' << io::fmt17(r.exponent(norm)) << '\n';
}

} // namespace lqocp
