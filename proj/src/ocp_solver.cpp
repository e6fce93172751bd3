#include "lqocp/ocp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lqocp/quadrature.hpp"

namespace lqocp {

void SolveOptions::validate() const {
    if (!(tol_outer > 0.0)) throw InvalidInput("SolveOptions: requires tol_outer > 0");
    if (!(tol_inner > 0.0)) throw InvalidInput("SolveOptions: requires tol_inner > 0");
    if (max_outer < 1) throw InvalidInput("SolveOptions: requires max_outer >= 1");
    if (max_inner < 1) throw InvalidInput("SolveOptions: requires max_inner >= 1");
    if (!(damping > 0.0 && damping <= 1.0))
        throw InvalidInput("SolveOptions: requires damping in (0, 1]");
}

namespace {

double sign(double t) { return (t > 0.0) - (t < 0.0); }

std::vector<double> to_std(const fem::Vector& v) { return {v.data(), v.data() + v.size()}; }

fem::Vector to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const fem::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

OcpSolver::OcpSolver(ProblemSpec spec, MeshPtr mesh, SolveOptions opts,
                     std::shared_ptr<const fem::EllipticSolver> elliptic)
    : spec_(std::move(spec)), mesh_(std::move(mesh)), opts_(std::move(opts)),
      elliptic_(std::move(elliptic)) {
    if (!mesh_) throw InvalidInput("OcpSolver: null mesh");
    spec_.validate();
    opts_.validate();
    if (!elliptic_)
        elliptic_ = std::make_shared<const fem::EllipticSolver>(mesh_, spec_.coeffs,
                                                                 opts_.linear_solver);
    if (elliptic_->mesh().get() != mesh_.get())
        throw InvalidInput("OcpSolver: elliptic solver belongs to another mesh");
    if (opts_.initial && opts_.initial->size() != mesh_->num_triangles())
        throw InvalidInput("SolveOptions: initial control has the wrong number of elements");

    const std::size_t nt = mesh_->num_triangles();
    area_ = to_eigen(std::vector<double>(mesh_->areas().begin(), mesh_->areas().end()));
    y_f_ = elliptic_->solve(fem::assemble_function_load(*mesh_, spec_.f));
    load_yd_ = fem::assemble_function_load(*mesh_, spec_.yd);
    yd_mid_.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const auto c = mesh_->corners(t);
        for (std::size_t m = 0; m < 3; ++m)
            yd_mid_[t][m] = spec_.yd(quad::map_point(c, quad::edge_midpoint[m].lambda));
    }

    // Power iteration for the largest eigenvalue of the tracking curvature;
    // the 1.25 factor keeps the estimate above the true norm.
    if (elliptic_->dofs().size() > 0) {
        Vec v = Vec::Ones(static_cast<Eigen::Index>(nt));
        double lambda = 0.0;
        for (int it = 0; it < 10; ++it) {
            const double norm = d_norm(v);
            if (norm == 0.0) break;
            v /= norm;
            const Vec av = curvature_apply(v);
            lambda = area_.dot(v.cwiseProduct(av));
            v = av;
        }
        curvature_ = 1.25 * lambda;
    }
}

fem::Vector OcpSolver::load(const Vec& u) const {
    return fem::assemble_p0_load(*mesh_, std::span<const double>(u.data(), u.size()));
}

fem::Vector OcpSolver::mean_of(const Vec& interior) const {
    const auto& dofs = elliptic_->dofs();
    Vec out(static_cast<Eigen::Index>(mesh_->num_triangles()));
    for (std::size_t t = 0; t < mesh_->num_triangles(); ++t) {
        double s = 0.0;
        for (int v : mesh_->triangle(t)) {
            const int i = dofs.vertex_to_dof[v];
            if (i >= 0) s += interior[i];
        }
        out[static_cast<Eigen::Index>(t)] = s / 3.0;
    }
    return out;
}

fem::Vector OcpSolver::state(const Vec& u) const { return elliptic_->solve(load(u)) + y_f_; }

fem::Vector OcpSolver::adjoint(const Vec& y) const {
    return elliptic_->solve(elliptic_->mass().matrix * y - load_yd_);
}

fem::Vector OcpSolver::curvature_apply(const Vec& v) const {
    const Vec sv = elliptic_->solve(load(v));
    return mean_of(elliptic_->solve(elliptic_->mass().matrix * sv));
}

double OcpSolver::d_norm(const Vec& v) const { return std::sqrt(area_.dot(v.cwiseProduct(v))); }

double OcpSolver::cost_from_state(const Vec& u, const Vec& y) const {
    const auto& dofs = elliptic_->dofs();
    const RegParams& p = spec_.params;
    double tracking = 0.0, control = 0.0, penalty = 0.0;
    for (std::size_t t = 0; t < mesh_->num_triangles(); ++t) {
        const auto& tri = mesh_->triangle(t);
        std::array<double, 3> yv{};
        for (int k = 0; k < 3; ++k) {
            const int i = dofs.vertex_to_dof[tri[k]];
            yv[k] = i >= 0 ? y[i] : 0.0;
        }
        // Edge midpoints in the order of quad::edge_midpoint.
        const std::array<double, 3> ym{0.5 * (yv[0] + yv[1]), 0.5 * (yv[1] + yv[2]),
                                       0.5 * (yv[0] + yv[2])};
        double local = 0.0;
        for (int m = 0; m < 3; ++m) local += (ym[m] - yd_mid_[t][m]) * (ym[m] - yd_mid_[t][m]);
        const double a = area_[static_cast<Eigen::Index>(t)];
        const double ut = u[static_cast<Eigen::Index>(t)];
        tracking += a * local / 3.0;
        control += a * ut * ut;
        penalty += a * penalty_density(ut, p);
    }
    return 0.5 * tracking + 0.5 * p.alpha * control + p.beta * penalty;
}

double OcpSolver::eval_cost(const fem::P0Field& u) const {
    if (u.mesh.get() != mesh_.get()) throw InvalidInput("eval_cost: control on another mesh");
    const Vec uv = to_eigen(u.values);
    return cost_from_state(uv, state(uv));
}

std::vector<double> OcpSolver::adjoint_mean(const std::vector<double>& u) const {
    if (u.size() != mesh_->num_triangles())
        throw InvalidInput("adjoint_mean: control has the wrong number of elements");
    return to_std(mean_of(adjoint(state(to_eigen(u)))));
}

fem::P0Field OcpSolver::inner_solve_l1(const fem::P0Field& g_hat, const fem::P0Field& u_start,
                                       int* iterations) const {
    if (g_hat.mesh.get() != mesh_.get() || u_start.mesh.get() != mesh_.get())
        throw InvalidInput("inner_solve_l1: fields on another mesh");
    const RegParams& p = spec_.params;
    const double bd = p.beta * p.delta();
    const Eigen::Index nt = static_cast<Eigen::Index>(mesh_->num_triangles());
    for (double g : g_hat.values)
        if (!(std::abs(g) <= p.delta() * (1.0 + 1e-12)))
            throw InvalidInput("inner_solve_l1: |g_hat| must not exceed delta_gamma");

    const Vec g = to_eigen(g_hat.values);
    Vec u = to_eigen(u_start.values).cwiseMax(p.u_a).cwiseMin(p.u_b);
    Vec phib = mean_of(adjoint(state(u)));
    const double tau = 1.0 / (p.alpha + curvature_);

    std::vector<double> trace;
    bool newton = opts_.inner_method == InnerMethod::semi_smooth_newton;
    Vec target(nt);
    std::vector<char> free(static_cast<std::size_t>(nt));
    for (int it = 0;; ++it) {
        for (Eigen::Index t = 0; t < nt; ++t) {
            const double z = p.beta * g[t] - phib[t];
            const double raw = soft_threshold(z, bd) / p.alpha;
            target[t] = std::clamp(raw, p.u_a, p.u_b);
            free[static_cast<std::size_t>(t)] = raw != 0.0 && raw > p.u_a && raw < p.u_b;
        }
        const double res = d_norm(u - target);
        if (!trace.empty() && res >= trace.back()) newton = false; // stagnation
        trace.push_back(res);
        if (res <= opts_.tol_inner) {
            if (iterations) *iterations = it;
            fem::P0Field out{mesh_, to_std(u)};
            return out;
        }
        if (it >= opts_.max_inner)
            throw NumericalError("inner_solve_l1: no convergence within max_inner iterations", res,
                                 trace);

        if (newton) {
            // Inactive elements jump to their targets; the free block solves
            // (alpha + Phi_FF) d_F = alpha (target - u)_F - (Phi d_I)_F.
            Vec d_inactive = Vec::Zero(nt);
            for (Eigen::Index t = 0; t < nt; ++t)
                if (!free[static_cast<std::size_t>(t)]) d_inactive[t] = target[t] - u[t];
            const Vec phi_inactive = curvature_apply(d_inactive);
            Vec rhs = Vec::Zero(nt);
            for (Eigen::Index t = 0; t < nt; ++t)
                if (free[static_cast<std::size_t>(t)])
                    rhs[t] = p.alpha * (target[t] - u[t]) - phi_inactive[t];
            auto mask = [&](Vec v) {
                for (Eigen::Index t = 0; t < nt; ++t)
                    if (!free[static_cast<std::size_t>(t)]) v[t] = 0.0;
                return v;
            };
            auto apply = [&](const Vec& x) { return Vec(p.alpha * x + mask(curvature_apply(x))); };
            auto dot = [&](const Vec& a, const Vec& b) { return area_.dot(a.cwiseProduct(b)); };
            // Conjugate gradients in the area-weighted inner product, where
            // the reduced operator is self-adjoint.
            Vec x = Vec::Zero(nt);
            Vec r = rhs;
            Vec dir = r;
            double rr = dot(r, r);
            const double stop = std::max(1e-14 * std::sqrt(rr), 1e-3 * opts_.tol_inner);
            for (int k = 0; k < 100 && std::sqrt(rr) > stop; ++k) {
                const Vec ad = apply(dir);
                const double step = rr / dot(dir, ad);
                x += step * dir;
                r -= step * ad;
                const double rr_next = dot(r, r);
                dir = r + (rr_next / rr) * dir;
                rr = rr_next;
            }
            u = (u + d_inactive + x).cwiseMax(p.u_a).cwiseMin(p.u_b);
        } else {
            // Proximal gradient step with tau = 1/(alpha + L).
            for (Eigen::Index t = 0; t < nt; ++t) {
                const double v = u[t] - tau * (phib[t] + p.alpha * u[t] - p.beta * g[t]);
                u[t] = std::clamp(soft_threshold(v, tau * bd), p.u_a, p.u_b);
            }
        }
        phib = mean_of(adjoint(state(u)));
    }
}

SolveReport OcpSolver::make_report(const Vec& u) const {
    const RegParams& p = spec_.params;
    SolveReport r;
    const Vec y = state(u);
    const Vec phi = adjoint(y);
    const Vec phib = mean_of(phi);
    const std::size_t nt = mesh_->num_triangles();
    r.u = {mesh_, to_std(u)};
    r.y = elliptic_->expand(y);
    r.phi = elliptic_->expand(phi);
    r.phi_bar = {mesh_, to_std(phib)};
    r.w = fem::P0Field::constant(mesh_, 0.0);
    r.zeta = fem::P0Field::constant(mesh_, 0.0);
    r.lambda_a = fem::P0Field::constant(mesh_, 0.0);
    r.lambda_b = fem::P0Field::constant(mesh_, 0.0);
    const double bd = p.beta * p.delta();
    for (std::size_t t = 0; t < nt; ++t) {
        const double ut = r.u.values[t];
        const double pt = r.phi_bar.values[t];
        const double wt = j_func(ut, p);
        r.w.values[t] = wt;
        double z = sign(ut);
        if (ut == 0.0) z = bd > 0.0 ? std::clamp(-(pt - p.beta * wt) / bd, -1.0, 1.0) : 0.0;
        r.zeta.values[t] = z;
        const double defect = pt + p.alpha * ut + p.beta * (p.delta() * z - wt);
        if (ut == p.u_a) r.lambda_a.values[t] = std::max(0.0, defect);
        if (ut == p.u_b) r.lambda_b.values[t] = std::max(0.0, -defect);
        if (ut != 0.0) ++r.support_element_count;
        r.fixed_point_residual =
            std::max(r.fixed_point_residual, std::abs(ut - scalar_dc_argmin(pt, p)));
    }
    r.kkt_residual = kkt_residual(r);
    return r;
}

double OcpSolver::kkt_residual(const SolveReport& report) const {
    const RegParams& p = spec_.params;
    const fem::P0Field phib = fem::element_average(report.phi);
    double stationarity = 0.0, complementarity = 0.0;
    for (std::size_t t = 0; t < mesh_->num_triangles(); ++t) {
        const double ut = report.u.values[t];
        const double z = ut != 0.0 ? sign(ut) : report.zeta.values[t];
        const double la = report.lambda_a.values[t], lb = report.lambda_b.values[t];
        const double d = phib.values[t] + p.alpha * ut + p.beta * (p.delta() * z - j_func(ut, p)) +
                         lb - la;
        const double a = mesh_->area(t);
        stationarity += a * d * d;
        complementarity += a * (std::abs(la * (ut - p.u_a)) + std::abs(lb * (p.u_b - ut)));
    }
    return std::sqrt(stationarity) + complementarity;
}

SolveReport OcpSolver::solve() const {
    const RegParams& p = spec_.params;
    const Eigen::Index nt = static_cast<Eigen::Index>(mesh_->num_triangles());
    const double slack = 10.0 * opts_.tol_inner;

    Vec u = opts_.initial ? to_eigen(*opts_.initial) : Vec::Zero(nt);
    u = u.cwiseMax(p.u_a).cwiseMin(p.u_b);
    double cost = cost_from_state(u, state(u));
    std::vector<double> history{cost};
    double max_increase = -std::numeric_limits<double>::infinity();
    int inner_total = 0, dca = 0, polish = 0;
    bool polishing = false, converged = false;
    double last_step = std::numeric_limits<double>::infinity();

    auto fail = [&](const std::string& what, double residual) {
        auto last = std::make_shared<SolveReport>(make_report(u));
        last->cost_history = history;
        last->outer_iterations = dca + polish;
        last->dca_iterations = dca;
        last->polish_iterations = polish;
        last->total_inner_iterations = inner_total;
        last->max_cost_increase = max_increase;
        return SolveFailure(what, residual, std::move(last));
    };

    for (int k = 0; k < opts_.max_outer && !converged; ++k) {
        Vec next(nt);
        double next_cost = 0.0;
        if (!polishing) {
            ++dca;
            fem::P0Field w = fem::P0Field::constant(mesh_, 0.0);
            for (Eigen::Index t = 0; t < nt; ++t) w.values[t] = j_func(u[t], p);
            int its = 0;
            fem::P0Field v;
            try {
                v = inner_solve_l1(w, {mesh_, to_std(u)}, &its);
            } catch (const NumericalError& e) {
                throw fail(std::string("solve: ") + e.what(), e.residual());
            }
            inner_total += its;
            const Vec vv = to_eigen(v.values);
            double theta = opts_.damping;
            next = u + theta * (vv - u);
            next_cost = cost_from_state(next, state(next));
            for (int halving = 0; halving < 6 && next_cost > cost + slack; ++halving) {
                theta *= 0.5;
                next = u + theta * (vv - u);
                next_cost = cost_from_state(next, state(next));
            }
            last_step = d_norm(next - u);
            if (last_step <= opts_.tol_outer) {
                converged = true;
                if (opts_.pointwise_polish) {
                    const Vec phib = mean_of(adjoint(state(next)));
                    for (Eigen::Index t = 0; t < nt && converged; ++t)
                        converged = std::abs(next[t] - scalar_dc_argmin(phib[t], p)) <= opts_.tol_inner;
                    polishing = !converged;
                }
            }
        } else {
            ++polish;
            const Vec phib = mean_of(adjoint(state(u)));
            for (Eigen::Index t = 0; t < nt; ++t) next[t] = scalar_dc_argmin(phib[t], p);
            next_cost = cost_from_state(next, state(next));
            if (next_cost > cost + slack) {
                // Majorized step: curvature bound L added to alpha guarantees descent.
                RegParams major = p;
                major.alpha = p.alpha + curvature_;
                for (Eigen::Index t = 0; t < nt; ++t)
                    next[t] = scalar_dc_argmin(phib[t] - curvature_ * u[t], major);
                next_cost = cost_from_state(next, state(next));
            }
            last_step = (next - u).cwiseAbs().maxCoeff();
            if (last_step <= opts_.tol_inner) converged = true;
        }
        max_increase = std::max(max_increase, next_cost - cost);
        u = next;
        cost = next_cost;
        history.push_back(cost);
    }
    if (!converged) throw fail("solve: no convergence within max_outer iterations", last_step);

    SolveReport r = make_report(u);
    r.cost_history = std::move(history);
    r.outer_iterations = dca + polish;
    r.dca_iterations = dca;
    r.polish_iterations = polish;
    r.total_inner_iterations = inner_total;
    r.max_cost_increase = max_increase;
    r.converged = true;
    return r;
}

StructureDiagnostics structure_diagnostics(const SolveReport& report, const RegParams& p) {
    StructureDiagnostics d;
    d.jump_threshold = p.jump_threshold();
    const std::size_t nt = report.u.values.size();
    double phi_inf = 0.0;
    for (double v : report.phi_bar.values) phi_inf = std::max(phi_inf, std::abs(v));
    const double lower_bound = p.eta_min() / p.alpha;
    double min_abs = std::numeric_limits<double>::infinity();
    double lower = std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < nt; ++t) {
        const double ut = report.u.values[t];
        if (ut == 0.0) continue;
        ++d.support_count;
        const double a = std::abs(ut);
        min_abs = std::min(min_abs, a);
        const bool at_bound = ut == p.u_a || ut == p.u_b;
        if (!at_bound && a < d.jump_threshold) ++d.band_violations;
        if (!at_bound && a > 1.0 / p.gamma) {
            const double middle = eta(a, p) / p.alpha;
            lower = std::min(lower, middle - lower_bound);
            upper = std::min(upper, phi_inf / p.alpha - middle);
        }
    }
    if (nt > 0) d.support_fraction = static_cast<double>(d.support_count) / static_cast<double>(nt);
    if (d.support_count > 0) {
        d.min_nonzero_abs = min_abs;
        d.scc_ratio = min_abs / d.jump_threshold;
    }
    d.lower_margin = std::isfinite(lower) ? lower : 0.0;
    d.upper_margin = std::isfinite(upper) ? upper : 0.0;
    return d;
}

double eval_cost(const ProblemSpec& spec, const MeshPtr& mesh, const fem::P0Field& u) {
    return OcpSolver(spec, mesh).eval_cost(u);
}

fem::P0Field inner_solve_l1(const ProblemSpec& spec, const MeshPtr& mesh, const fem::P0Field& g_hat,
                            const fem::P0Field& u_start, const SolveOptions& opts) {
    return OcpSolver(spec, mesh, opts).inner_solve_l1(g_hat, u_start);
}

SolveReport solve(const ProblemSpec& spec, const MeshPtr& mesh, const SolveOptions& opts) {
    return OcpSolver(spec, mesh, opts).solve();
}

double kkt_residual(const ProblemSpec& spec, const MeshPtr& mesh, const SolveReport& report) {
    return OcpSolver(spec, mesh).kkt_residual(report);
}

} // namespace lqocp
