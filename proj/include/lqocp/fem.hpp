#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "lqocp/common.hpp"
#include "lqocp/mesh.hpp"

namespace lqocp::fem {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Continuous piecewise-linear field, one coefficient per mesh vertex.
/// States and adjoints vanish on every boundary vertex.
struct P1Field {
    MeshPtr mesh;
    std::vector<double> values;

    static P1Field zeros(MeshPtr m) {
        const std::size_t n = m->num_vertices();
        return {std::move(m), std::vector<double>(n, 0.0)};
    }
    [[nodiscard]] bool vanishes_on_boundary() const;
};

/// Piecewise-constant field, one value per triangle.
struct P0Field {
    MeshPtr mesh;
    std::vector<double> values;

    static P0Field constant(MeshPtr m, double c) {
        const std::size_t n = m->num_triangles();
        return {std::move(m), std::vector<double>(n, c)};
    }
};

struct Sym2 {
    double a11 = 1.0, a12 = 0.0, a22 = 1.0;
    [[nodiscard]] double min_eigenvalue() const;
};

/// Coefficients of A y = -div(a grad y) + c0 y. Empty callables mean the
/// defaults a = I and c0 = 0, which are integrated in closed form.
struct EllipticCoeffs {
    std::function<Sym2(Point2)> a;
    std::function<double(Point2)> c0;

    [[nodiscard]] bool is_laplacian() const { return !a && !c0; }
};

/// Numbering of the non-Dirichlet vertices.
struct DofMap {
    std::vector<int> vertex_to_dof; // -1 on Dirichlet vertices
    std::vector<int> dof_to_vertex;

    static DofMap interior(const TriMesh& mesh);
    [[nodiscard]] std::size_t size() const { return dof_to_vertex.size(); }
};

/// Symmetric positive definite matrix over interior DOFs.
struct SparseSpd {
    SparseMatrix matrix;
    [[nodiscard]] Eigen::Index size() const { return matrix.rows(); }
};

/// Stiffness matrix a(phi_j, phi_i) over all vertices (no boundary elimination).
/// Throws InvalidInput naming the offending point if a(x) is not uniformly
/// elliptic or c0 < 0 at a quadrature point.
SparseMatrix assemble_stiffness_full(const TriMesh& mesh, const EllipticCoeffs& coeffs = {});
SparseSpd assemble_stiffness(const TriMesh& mesh, const EllipticCoeffs& coeffs = {});

/// P1 mass matrix, full and restricted to interior DOFs.
SparseMatrix assemble_mass_full(const TriMesh& mesh);
SparseSpd assemble_mass(const TriMesh& mesh);

/// b_i = sum_T u_T |T| / 3 over the triangles incident to interior vertex i.
Vector assemble_p0_load(const P0Field& u);
Vector assemble_p0_load(const TriMesh& mesh, std::span<const double> u);

/// b_i = int f phi_i by the edge-midpoint rule, interior vertices only.
Vector assemble_function_load(const TriMesh& mesh, const Function2D& f);

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
/// Stops once ||r||/||b|| <= tol; the iteration cap is 20 sqrt(n).
/// Throws NumericalError carrying the last residual when the cap is hit.
Vector solve_spd(const SparseSpd& a, const Vector& b, double tol = 1e-12,
                 SolveStats* stats = nullptr);

enum class LinearSolverKind { direct, pcg };

/// The discrete solution operator of one elliptic problem on one mesh.
/// Holds the interior stiffness and mass matrices and, for the direct
/// backend, a sparse Cholesky factorization reused across solves.
/// Solving is const and may be called from several threads.
class EllipticSolver {
public:
    EllipticSolver(MeshPtr mesh, const EllipticCoeffs& coeffs = {},
                   LinearSolverKind kind = LinearSolverKind::direct, double tol = 1e-12);

    [[nodiscard]] Vector solve(const Vector& rhs) const;
    [[nodiscard]] const MeshPtr& mesh() const { return mesh_; }
    [[nodiscard]] const DofMap& dofs() const { return dofs_; }
    [[nodiscard]] const SparseSpd& stiffness() const { return stiffness_; }
    [[nodiscard]] const SparseSpd& mass() const { return mass_; }
    [[nodiscard]] LinearSolverKind kind() const { return kind_; }

    /// Interior coefficient vector -> P1 field with zero boundary values.
    [[nodiscard]] P1Field expand(const Vector& interior) const;
    /// P1 field -> interior coefficient vector.
    [[nodiscard]] Vector restrict_to_interior(const P1Field& field) const;

private:
    MeshPtr mesh_;
    DofMap dofs_;
    SparseSpd stiffness_;
    SparseSpd mass_;
    LinearSolverKind kind_;
    double tol_;
    std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> factor_;
};

/// Discrete state y_h = S_h u + y_{h,f}.
P1Field solve_state(const MeshPtr& mesh, const P0Field& u, const Function2D& f = {},
                    const EllipticCoeffs& coeffs = {},
                    LinearSolverKind kind = LinearSolverKind::pcg);

/// Discrete adjoint: a*(phi_h, v) = (y_h - y_d, v) for all v in Y_h.
P1Field solve_adjoint(const MeshPtr& mesh, const P1Field& y, const Function2D& yd,
                      const EllipticCoeffs& coeffs = {},
                      LinearSolverKind kind = LinearSolverKind::pcg);

/// Mean over each triangle of a P1 field (average of its three vertex values).
P0Field element_average(const P1Field& y);

/// Exact prolongation to a descendant mesh (P0: constant on children,
/// P1: evaluation at the fine vertices). Throws InvalidInput across lineages.
P0Field prolong(const P0Field& coarse, const MeshPtr& fine);
P1Field prolong(const P1Field& coarse, const MeshPtr& fine);

/// Exact L2 inner products. Fields on different meshes of one refinement
/// lineage are compared on the finer mesh.
double l2_inner(const P1Field& p, const P1Field& q);
double l2_inner(const P0Field& p, const P0Field& q);
double l2_inner(const P1Field& p, const P0Field& q);
inline double l2_inner(const P0Field& p, const P1Field& q) { return l2_inner(q, p); }
double l2_norm(const P1Field& p);
double l2_norm(const P0Field& p);

/// ||y_h - y||_{L2} and |y_h - y|_{H1} against an analytic function, by the
/// degree-4 rule on each triangle.
double l2_error(const P1Field& yh, const Function2D& exact);
double h1_seminorm_error(const P1Field& yh,
                         const std::function<std::array<double, 2>(Point2)>& exact_gradient);

/// Gradients of the three barycentric coordinates of triangle t.
std::array<std::array<double, 2>, 3> barycentric_gradients(const TriMesh& mesh, std::size_t t);

} // namespace lqocp::fem
