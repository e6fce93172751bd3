#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "lqocp/common.hpp"
#include "lqocp/fem.hpp"
#include "lqocp/mesh.hpp"
#include "lqocp/scalar_reg.hpp"

namespace lqocp {

struct ProblemSpec {
    RegParams params;
    Function2D yd;
    Function2D f;
    fem::EllipticCoeffs coeffs;

    void validate() const { params.validate(); }
};

enum class InnerMethod { semi_smooth_newton, picard };

struct SolveOptions {
    double tol_outer = 1e-9;  // L2 norm of the DCA control step
    double tol_inner = 1e-10; // L2 norm of the inner fixed-point residual
    int max_outer = 200;
    int max_inner = 50;
    double damping = 1.0;     // initial theta in (0, 1]
    std::optional<std::vector<double>> initial; // one value per element; default 0
    InnerMethod inner_method = InnerMethod::semi_smooth_newton;
    fem::LinearSolverKind linear_solver = fem::LinearSolverKind::direct;
    /// After DCA stalls, iterate u_T <- scalar_dc_argmin(phibar_T) to a fixed point.
    bool pointwise_polish = true;

    void validate() const;
};

struct SolveReport {
    fem::P0Field u;
    fem::P1Field y;
    fem::P1Field phi;
    fem::P0Field w;
    fem::P0Field zeta;
    fem::P0Field lambda_a;
    fem::P0Field lambda_b;
    fem::P0Field phi_bar;
    std::vector<double> cost_history;
    int outer_iterations = 0;
    int dca_iterations = 0;
    int polish_iterations = 0;
    int total_inner_iterations = 0;
    double kkt_residual = 0.0;
    /// max_T |u_T - scalar_dc_argmin(phibar_T)|.
    double fixed_point_residual = 0.0;
    /// max over steps of J(u^{k+1}) - J(u^k); <= 0 means monotone.
    double max_cost_increase = 0.0;
    int support_element_count = 0;
    bool converged = false;
};

/// Outer-loop failure; carries the last iterate's report.
class SolveFailure : public NumericalError {
public:
    SolveFailure(const std::string& what, double residual, std::shared_ptr<const SolveReport> last)
        : NumericalError(what, residual), last_(std::move(last)) {}
    [[nodiscard]] const SolveReport& last_report() const { return *last_; }

private:
    std::shared_ptr<const SolveReport> last_;
};

struct StructureDiagnostics {
    double support_fraction = 0.0;
    int support_count = 0;
    double min_nonzero_abs = 0.0;     // 0 if the support is empty
    int band_violations = 0;          // 0 < |u_T| < s* + (1-q)/gamma, not at a bound
    double jump_threshold = 0.0;
    /// min over interior support elements of
    /// |u| + beta q/alpha (|u| + (q-1)/gamma)^(q-1) - (s*(1 + 1/(1-q)) + (1-q)/gamma).
    double lower_margin = 0.0;
    /// min over interior support elements of ||phibar||_inf/alpha minus the middle term.
    double upper_margin = 0.0;
    /// min |u_T| / (s* + (1-q)/gamma) over the support.
    double scc_ratio = 0.0;
};

StructureDiagnostics structure_diagnostics(const SolveReport& report, const RegParams& p);

/// Discrete problem on one mesh. Holds the factorized elliptic operator and
/// the quadrature data of y_d and f; const member functions are reentrant.
class OcpSolver {
public:
    OcpSolver(ProblemSpec spec, MeshPtr mesh, SolveOptions opts = {},
              std::shared_ptr<const fem::EllipticSolver> elliptic = nullptr);

    [[nodiscard]] const ProblemSpec& spec() const { return spec_; }
    [[nodiscard]] const MeshPtr& mesh() const { return mesh_; }
    [[nodiscard]] const SolveOptions& options() const { return opts_; }
    [[nodiscard]] const std::shared_ptr<const fem::EllipticSolver>& elliptic() const {
        return elliptic_;
    }

    /// J_gamma^h(u).
    [[nodiscard]] double eval_cost(const fem::P0Field& u) const;

    /// Minimizer of the auxiliary L1 problem with linear term -beta (g_hat, u).
    /// Throws NumericalError with the residual trace after max_inner steps.
    [[nodiscard]] fem::P0Field inner_solve_l1(const fem::P0Field& g_hat, const fem::P0Field& u_start,
                                              int* iterations = nullptr) const;

    /// DCA outer loop followed by pointwise polishing. Throws SolveFailure.
    [[nodiscard]] SolveReport solve() const;

    /// Stationarity defect plus complementarity defects of a report.
    [[nodiscard]] double kkt_residual(const SolveReport& report) const;

    /// Per-element mean of the discrete adjoint at u.
    [[nodiscard]] std::vector<double> adjoint_mean(const std::vector<double>& u) const;

    /// Estimate of the D-operator norm of u -> mean(S* M S u).
    [[nodiscard]] double tracking_curvature() const { return curvature_; }

private:
    using Vec = fem::Vector;

    [[nodiscard]] Vec load(const Vec& u) const;
    [[nodiscard]] Vec mean_of(const Vec& interior) const;
    [[nodiscard]] Vec state(const Vec& u) const;
    [[nodiscard]] Vec adjoint(const Vec& y) const;
    [[nodiscard]] Vec curvature_apply(const Vec& v) const;
    [[nodiscard]] double cost_from_state(const Vec& u, const Vec& y) const;
    [[nodiscard]] double d_norm(const Vec& v) const;
    [[nodiscard]] SolveReport make_report(const Vec& u) const;

    ProblemSpec spec_;
    MeshPtr mesh_;
    SolveOptions opts_;
    std::shared_ptr<const fem::EllipticSolver> elliptic_;
    Vec area_;
    Vec y_f_;      // S_h f
    Vec load_yd_;  // int y_d phi_i, interior
    std::vector<std::array<double, 3>> yd_mid_;
    double curvature_ = 0.0;
};

double eval_cost(const ProblemSpec& spec, const MeshPtr& mesh, const fem::P0Field& u);
fem::P0Field inner_solve_l1(const ProblemSpec& spec, const MeshPtr& mesh, const fem::P0Field& g_hat,
                            const fem::P0Field& u_start, const SolveOptions& opts = {});
SolveReport solve(const ProblemSpec& spec, const MeshPtr& mesh, const SolveOptions& opts = {});
double kkt_residual(const ProblemSpec& spec, const MeshPtr& mesh, const SolveReport& report);

} // namespace lqocp
