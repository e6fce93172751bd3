#include "lqocp/fem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lqocp/quadrature.hpp"

namespace lqocp::fem {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void require_same_mesh(const MeshPtr& a, const MeshPtr& b, const char* where) {
    if (!a || !b || a.get() != b.get())
        throw InvalidInput(std::string(where) + ": fields live on different meshes");
}

SparseMatrix restrict_matrix(const SparseMatrix& full, const DofMap& dofs) {
    Triplets triplets;
    triplets.reserve(static_cast<std::size_t>(full.nonZeros()));
    for (int col = 0; col < full.outerSize(); ++col) {
        const int j = dofs.vertex_to_dof[col];
        if (j < 0) continue;
        for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
            const int i = dofs.vertex_to_dof[it.row()];
            if (i >= 0) triplets.emplace_back(i, j, it.value());
        }
    }
    const auto n = static_cast<Eigen::Index>(dofs.size());
    SparseMatrix out(n, n);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

std::string describe(Point2 p) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << p.x << ", " << p.y << ")";
    return os.str();
}

} // namespace

bool P1Field::vanishes_on_boundary() const {
    for (std::size_t v = 0; v < values.size(); ++v)
        if (mesh->is_boundary(v) && values[v] != 0.0) return false;
    return true;
}

double Sym2::min_eigenvalue() const {
    const double mean = 0.5 * (a11 + a22);
    const double half_gap = std::hypot(0.5 * (a11 - a22), a12);
    return mean - half_gap;
}

DofMap DofMap::interior(const TriMesh& mesh) {
    DofMap map;
    map.vertex_to_dof.assign(mesh.num_vertices(), -1);
    map.dof_to_vertex.reserve(mesh.num_interior_vertices());
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        if (mesh.is_boundary(v)) continue;
        map.vertex_to_dof[v] = static_cast<int>(map.dof_to_vertex.size());
        map.dof_to_vertex.push_back(static_cast<int>(v));
    }
    return map;
}

std::array<std::array<double, 2>, 3> barycentric_gradients(const TriMesh& mesh, std::size_t t) {
    const auto c = mesh.corners(t);
    const double inv = 1.0 / (2.0 * mesh.area(t));
    return {{{(c[1].y - c[2].y) * inv, (c[2].x - c[1].x) * inv},
             {(c[2].y - c[0].y) * inv, (c[0].x - c[2].x) * inv},
             {(c[0].y - c[1].y) * inv, (c[1].x - c[0].x) * inv}}};
}

SparseMatrix assemble_stiffness_full(const TriMesh& mesh, const EllipticCoeffs& coeffs) {
    Triplets triplets;
    triplets.reserve(9 * mesh.num_triangles());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const double area = mesh.area(t);
        const auto grad = barycentric_gradients(mesh, t);

        // Edge-midpoint averages of a(x) and c0(x); the defaults are exact.
        Sym2 a;
        std::array<double, 3> c0_mid{0.0, 0.0, 0.0};
        if (coeffs.a || coeffs.c0) {
            const auto corners = mesh.corners(t);
            a = Sym2{0.0, 0.0, 0.0};
            for (std::size_t q = 0; q < quad::edge_midpoint.size(); ++q) {
                const Point2 p = quad::map_point(corners, quad::edge_midpoint[q].lambda);
                const Sym2 aq = coeffs.a ? coeffs.a(p) : Sym2{};
                if (!(aq.min_eigenvalue() > 0.0))
                    throw InvalidInput("assemble_stiffness: coefficient matrix not uniformly "
                                       "elliptic at " + describe(p));
                a.a11 += aq.a11 / 3.0;
                a.a12 += aq.a12 / 3.0;
                a.a22 += aq.a22 / 3.0;
                if (coeffs.c0) {
                    c0_mid[q] = coeffs.c0(p);
                    if (!(c0_mid[q] >= 0.0))
                        throw InvalidInput("assemble_stiffness: c0 < 0 at " + describe(p));
                }
            }
        }
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const auto& gi = grad[i];
                const auto& gj = grad[j];
                double value = area * (gi[0] * (a.a11 * gj[0] + a.a12 * gj[1]) +
                                       gi[1] * (a.a12 * gj[0] + a.a22 * gj[1]));
                if (coeffs.c0) {
                    double mass = 0.0;
                    for (std::size_t q = 0; q < quad::edge_midpoint.size(); ++q) {
                        const auto& l = quad::edge_midpoint[q].lambda;
                        mass += c0_mid[q] * l[i] * l[j] / 3.0;
                    }
                    value += area * mass;
                }
                triplets.emplace_back(tri[i], tri[j], value);
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
    SparseMatrix a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
}

SparseSpd assemble_stiffness(const TriMesh& mesh, const EllipticCoeffs& coeffs) {
    return {restrict_matrix(assemble_stiffness_full(mesh, coeffs), DofMap::interior(mesh))};
}

SparseMatrix assemble_mass_full(const TriMesh& mesh) {
    Triplets triplets;
    triplets.reserve(9 * mesh.num_triangles());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const double area = mesh.area(t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                triplets.emplace_back(tri[i], tri[j], area * (i == j ? 2.0 : 1.0) / 12.0);
    }
    const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
    SparseMatrix m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

SparseSpd assemble_mass(const TriMesh& mesh) {
    return {restrict_matrix(assemble_mass_full(mesh), DofMap::interior(mesh))};
}

Vector assemble_p0_load(const TriMesh& mesh, std::span<const double> u) {
    if (u.size() != mesh.num_triangles())
        throw InvalidInput("assemble_p0_load: control size does not match the mesh");
    const DofMap dofs = DofMap::interior(mesh);
    Vector b = Vector::Zero(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const double share = u[t] * mesh.area(t) / 3.0;
        for (int v : mesh.triangle(t)) {
            const int i = dofs.vertex_to_dof[v];
            if (i >= 0) b[i] += share;
        }
    }
    return b;
}

Vector assemble_p0_load(const P0Field& u) {
    if (!u.mesh) throw InvalidInput("assemble_p0_load: field without mesh");
    return assemble_p0_load(*u.mesh, u.values);
}

Vector assemble_function_load(const TriMesh& mesh, const Function2D& f) {
    const DofMap dofs = DofMap::interior(mesh);
    Vector b = Vector::Zero(static_cast<Eigen::Index>(dofs.size()));
    if (f.is_zero()) return b;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto corners = mesh.corners(t);
        const auto& tri = mesh.triangle(t);
        const double w = mesh.area(t) / 3.0;
        for (const auto& qp : quad::edge_midpoint) {
            const double fq = f(quad::map_point(corners, qp.lambda));
            for (int k = 0; k < 3; ++k) {
                const int i = dofs.vertex_to_dof[tri[k]];
                if (i >= 0) b[i] += w * fq * qp.lambda[k];
            }
        }
    }
    return b;
}

Vector solve_spd(const SparseSpd& a, const Vector& b, double tol, SolveStats* stats) {
    const Eigen::Index n = a.size();
    if (b.size() != n) throw InvalidInput("solve_spd: right-hand side size mismatch");
    Vector x = Vector::Zero(n);
    const double bnorm = b.norm();
    if (stats) *stats = {};
    if (n == 0 || bnorm == 0.0) return x;

    const Vector inv_diag = a.matrix.diagonal().cwiseInverse();
    Vector r = b;
    Vector z = inv_diag.cwiseProduct(r);
    Vector p = z;
    Vector ap(n);
    double rz = r.dot(z);
    const int cap = static_cast<int>(20.0 * std::ceil(std::sqrt(static_cast<double>(n))));
    double rel = 1.0;
    for (int it = 1; it <= cap; ++it) {
        ap.noalias() = a.matrix * p;
        const double step = rz / p.dot(ap);
        x += step * p;
        r -= step * ap;
        rel = r.norm() / bnorm;
        if (rel <= tol) {
            if (stats) *stats = {it, rel};
            return x;
        }
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    throw NumericalError("solve_spd: conjugate gradients hit the iteration cap", rel);
}

EllipticSolver::EllipticSolver(MeshPtr mesh, const EllipticCoeffs& coeffs, LinearSolverKind kind,
                               double tol)
    : mesh_(std::move(mesh)), kind_(kind), tol_(tol) {
    if (!mesh_) throw InvalidInput("EllipticSolver: null mesh");
    dofs_ = DofMap::interior(*mesh_);
    stiffness_ = {restrict_matrix(assemble_stiffness_full(*mesh_, coeffs), dofs_)};
    mass_ = {restrict_matrix(assemble_mass_full(*mesh_), dofs_)};
    if (kind_ == LinearSolverKind::direct && stiffness_.size() > 0) {
        factor_ = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(stiffness_.matrix);
        if (factor_->info() != Eigen::Success)
            throw NumericalError("EllipticSolver: Cholesky factorization failed", 0.0);
    }
}

Vector EllipticSolver::solve(const Vector& rhs) const {
    if (rhs.size() != stiffness_.size())
        throw InvalidInput("EllipticSolver::solve: right-hand side size mismatch");
    if (stiffness_.size() == 0) return Vector(0);
    if (kind_ == LinearSolverKind::pcg) return solve_spd(stiffness_, rhs, tol_);
    return factor_->solve(rhs);
}

P1Field EllipticSolver::expand(const Vector& interior) const {
    P1Field field = P1Field::zeros(mesh_);
    for (std::size_t i = 0; i < dofs_.size(); ++i)
        field.values[dofs_.dof_to_vertex[i]] = interior[static_cast<Eigen::Index>(i)];
    return field;
}

Vector EllipticSolver::restrict_to_interior(const P1Field& field) const {
    require_same_mesh(field.mesh, mesh_, "restrict_to_interior");
    Vector out(static_cast<Eigen::Index>(dofs_.size()));
    for (std::size_t i = 0; i < dofs_.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = field.values[dofs_.dof_to_vertex[i]];
    return out;
}

P1Field solve_state(const MeshPtr& mesh, const P0Field& u, const Function2D& f,
                    const EllipticCoeffs& coeffs, LinearSolverKind kind) {
    require_same_mesh(mesh, u.mesh, "solve_state");
    const EllipticSolver solver(mesh, coeffs, kind);
    const Vector rhs = assemble_p0_load(u) + assemble_function_load(*mesh, f);
    return solver.expand(solver.solve(rhs));
}

P1Field solve_adjoint(const MeshPtr& mesh, const P1Field& y, const Function2D& yd,
                      const EllipticCoeffs& coeffs, LinearSolverKind kind) {
    require_same_mesh(mesh, y.mesh, "solve_adjoint");
    const EllipticSolver solver(mesh, coeffs, kind);
    // The edge-midpoint rule integrates (y_h, phi_i) exactly, so the mass
    // matrix over all vertices reproduces it, boundary values included.
    const SparseMatrix mass_full = assemble_mass_full(*mesh);
    const Eigen::Map<const Vector> yv(y.values.data(), static_cast<Eigen::Index>(y.values.size()));
    const Vector my_full = mass_full * yv;
    Vector rhs(static_cast<Eigen::Index>(solver.dofs().size()));
    for (std::size_t i = 0; i < solver.dofs().size(); ++i)
        rhs[static_cast<Eigen::Index>(i)] = my_full[solver.dofs().dof_to_vertex[i]];
    rhs -= assemble_function_load(*mesh, yd);
    return solver.expand(solver.solve(rhs));
}

P0Field element_average(const P1Field& y) {
    P0Field out = P0Field::constant(y.mesh, 0.0);
    for (std::size_t t = 0; t < y.mesh->num_triangles(); ++t) {
        const auto& tri = y.mesh->triangle(t);
        out.values[t] = (y.values[tri[0]] + y.values[tri[1]] + y.values[tri[2]]) / 3.0;
    }
    return out;
}

P0Field prolong(const P0Field& coarse, const MeshPtr& fine) {
    const std::vector<int> anc = ancestor_map(*fine, *coarse.mesh);
    P0Field out = P0Field::constant(fine, 0.0);
    for (std::size_t t = 0; t < anc.size(); ++t) out.values[t] = coarse.values[anc[t]];
    return out;
}

P1Field prolong(const P1Field& coarse, const MeshPtr& fine) {
    const std::vector<int> anc = ancestor_map(*fine, *coarse.mesh);
    const TriMesh& cm = *coarse.mesh;
    P1Field out = P1Field::zeros(fine);
    std::vector<char> done(fine->num_vertices(), 0);
    for (std::size_t t = 0; t < anc.size(); ++t) {
        const auto c = cm.corners(static_cast<std::size_t>(anc[t]));
        const auto& ctri = cm.triangle(static_cast<std::size_t>(anc[t]));
        const auto grad = barycentric_gradients(cm, static_cast<std::size_t>(anc[t]));
        for (int v : fine->triangle(t)) {
            if (done[v]) continue;
            const Point2 p = fine->vertex(v);
            double value = 0.0;
            for (int k = 0; k < 3; ++k) {
                // lambda_k(p) = 1 at corner k, affine, zero on the opposite edge.
                const Point2 ck = c[k];
                const double lk = 1.0 + grad[k][0] * (p.x - ck.x) + grad[k][1] * (p.y - ck.y);
                value += lk * coarse.values[ctri[k]];
            }
            out.values[v] = value;
            done[v] = 1;
        }
    }
    return out;
}

namespace {

// Brings two fields onto the finer of two lineage-related meshes.
template <class A, class B>
std::pair<A, B> common_mesh(const A& p, const B& q, const char* where) {
    if (!p.mesh || !q.mesh) throw InvalidInput(std::string(where) + ": field without mesh");
    if (p.mesh == q.mesh) return {p, q};
    if (is_ancestor(*p.mesh, *q.mesh)) return {prolong(p, q.mesh), q};
    if (is_ancestor(*q.mesh, *p.mesh)) return {p, prolong(q, p.mesh)};
    throw InvalidInput(std::string(where) + ": incompatible meshes");
}

} // namespace

double l2_inner(const P1Field& p_in, const P1Field& q_in) {
    const auto [p, q] = common_mesh(p_in, q_in, "l2_inner");
    const TriMesh& m = *p.mesh;
    double sum = 0.0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangle(t);
        const double p0 = p.values[tri[0]], p1 = p.values[tri[1]], p2 = p.values[tri[2]];
        const double q0 = q.values[tri[0]], q1 = q.values[tri[1]], q2 = q.values[tri[2]];
        sum += m.area(t) / 12.0 * (p0 * q0 + p1 * q1 + p2 * q2 + (p0 + p1 + p2) * (q0 + q1 + q2));
    }
    return sum;
}

double l2_inner(const P0Field& p_in, const P0Field& q_in) {
    const auto [p, q] = common_mesh(p_in, q_in, "l2_inner");
    const TriMesh& m = *p.mesh;
    double sum = 0.0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) sum += m.area(t) * p.values[t] * q.values[t];
    return sum;
}

double l2_inner(const P1Field& p_in, const P0Field& q_in) {
    const auto [p, q] = common_mesh(p_in, q_in, "l2_inner");
    const TriMesh& m = *p.mesh;
    double sum = 0.0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangle(t);
        sum += m.area(t) * q.values[t] * (p.values[tri[0]] + p.values[tri[1]] + p.values[tri[2]]) /
               3.0;
    }
    return sum;
}

double l2_norm(const P1Field& p) { return std::sqrt(std::max(0.0, l2_inner(p, p))); }
double l2_norm(const P0Field& p) { return std::sqrt(std::max(0.0, l2_inner(p, p))); }

double l2_error(const P1Field& yh, const Function2D& exact) {
    const TriMesh& m = *yh.mesh;
    double sum = 0.0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        const auto c = m.corners(t);
        const auto& tri = m.triangle(t);
        double local = 0.0;
        for (const auto& qp : quad::degree4) {
            const double vh = qp.lambda[0] * yh.values[tri[0]] + qp.lambda[1] * yh.values[tri[1]] +
                              qp.lambda[2] * yh.values[tri[2]];
            const double d = vh - exact(quad::map_point(c, qp.lambda));
            local += qp.weight * d * d;
        }
        sum += m.area(t) * local;
    }
    return std::sqrt(sum);
}

double h1_seminorm_error(const P1Field& yh,
                         const std::function<std::array<double, 2>(Point2)>& exact_gradient) {
    const TriMesh& m = *yh.mesh;
    double sum = 0.0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        const auto c = m.corners(t);
        const auto& tri = m.triangle(t);
        const auto grad = barycentric_gradients(m, t);
        std::array<double, 2> gh{0.0, 0.0};
        for (int k = 0; k < 3; ++k) {
            gh[0] += yh.values[tri[k]] * grad[k][0];
            gh[1] += yh.values[tri[k]] * grad[k][1];
        }
        double local = 0.0;
        for (const auto& qp : quad::degree4) {
            const auto g = exact_gradient(quad::map_point(c, qp.lambda));
            local += qp.weight * ((gh[0] - g[0]) * (gh[0] - g[0]) + (gh[1] - g[1]) * (gh[1] - g[1]));
        }
        sum += m.area(t) * local;
    }
    return std::sqrt(sum);
}

} // namespace lqocp::fem
