#pragma once

#include <optional>

namespace lqocp {

/// Parameters of the pointwise regularizer and the control box.
struct RegParams {
    double q = 0.5;
    double gamma = 16000.0;
    double alpha = 0.24;
    double beta = 0.0002;
    double u_a = -0.8;
    double u_b = 0.55;

    /// Throws InvalidInput naming the first violated invariant:
    /// 0 < q < 1, gamma >= 1, alpha > 0, beta >= 0, u_a < 0 < u_b, all finite.
    void validate() const;

    /// delta_gamma = q^q gamma^(1-q), slope of the convex L1 part.
    [[nodiscard]] double delta() const;
    /// Lipschitz constant 2 gamma delta_gamma / q of j.
    [[nodiscard]] double lipschitz_j() const;
    /// s* = (beta/alpha q (1-q))^(1/(2-q)).
    [[nodiscard]] double s_star() const;
    /// s* + (1-q)/gamma: lower bound on |u| for nonzero interior minimizers.
    [[nodiscard]] double jump_threshold() const;
    /// Minimum of eta(u) = alpha u + beta q (u + (q-1)/gamma)^(q-1) on its branch.
    [[nodiscard]] double eta_min() const;
};

/// h_{q,gamma}(t).
double huber(double t, const RegParams& p);

/// huber(t)^q, the integrand of the regularization functional.
double penalty_density(double t, const RegParams& p);

/// Derivative of the concave part of the DC splitting; |j| <= delta_gamma.
double j_func(double t, const RegParams& p);

/// Proximal map of tau |.|.
double soft_threshold(double y, double tau);

/// eta(u) for u > (1-q)/gamma.
double eta(double u, const RegParams& p);

/// Root of eta(|u|) = |phi_val| on the branch |u| > s* + (1-q)/gamma with
/// sign(u) = -sign(phi_val), or nullopt if |phi_val| <= eta_min().
std::optional<double> critical_root(double phi_val, const RegParams& p);

/// psi(u) = phi_val u + alpha/2 u^2 + beta penalty_density(u).
double scalar_objective(double u, double phi_val, const RegParams& p);

/// Global minimizer of psi over [u_a, u_b]. Ties resolve to 0, then to the
/// smaller |u|.
double scalar_dc_argmin(double phi_val, const RegParams& p);

} // namespace lqocp
