#include "lqocp/scalar_reg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "lqocp/common.hpp"

namespace lqocp {

namespace {

void require_finite(double v, const char* where) {
    if (!std::isfinite(v)) throw InvalidInput(std::string(where) + ": non-finite input");
}

double sign(double t) { return (t > 0.0) - (t < 0.0); }

} // namespace

void RegParams::validate() const {
    for (double v : {q, gamma, alpha, beta, u_a, u_b})
        if (!std::isfinite(v)) throw InvalidInput("RegParams: all parameters must be finite");
    if (!(q > 0.0 && q < 1.0)) throw InvalidInput("RegParams: requires 0 < q < 1");
    if (!(gamma >= 1.0)) throw InvalidInput("RegParams: requires gamma >= 1");
    if (!(alpha > 0.0)) throw InvalidInput("RegParams: requires alpha > 0");
    if (!(beta >= 0.0)) throw InvalidInput("RegParams: requires beta >= 0");
    if (!(u_a < 0.0 && 0.0 < u_b)) throw InvalidInput("RegParams: requires u_a < 0 < u_b");
}

double RegParams::delta() const { return std::pow(q, q) * std::pow(gamma, 1.0 - q); }

double RegParams::lipschitz_j() const { return 2.0 * gamma * delta() / q; }

double RegParams::s_star() const {
    return std::pow(beta / alpha * q * (1.0 - q), 1.0 / (2.0 - q));
}

double RegParams::jump_threshold() const { return s_star() + (1.0 - q) / gamma; }

double RegParams::eta_min() const {
    const double s = s_star();
    return alpha * s * (1.0 + 1.0 / (1.0 - q)) + alpha * (1.0 - q) / gamma;
}

double huber(double t, const RegParams& p) {
    require_finite(t, "huber");
    const double a = std::abs(t);
    if (a <= 1.0 / p.gamma)
        return p.q * std::pow(p.gamma, (1.0 - p.q) / p.q) * std::pow(a, 1.0 / p.q);
    return a - (1.0 - p.q) / p.gamma;
}

double penalty_density(double t, const RegParams& p) {
    require_finite(t, "penalty_density");
    const double a = std::abs(t);
    // Inside the smoothing zone h^q = delta |t| exactly.
    if (a <= 1.0 / p.gamma) return p.delta() * a;
    return std::pow(a - (1.0 - p.q) / p.gamma, p.q);
}

double j_func(double t, const RegParams& p) {
    require_finite(t, "j_func");
    const double a = std::abs(t);
    if (a <= 1.0 / p.gamma) return 0.0;
    return (p.delta() - p.q * std::pow(a + (p.q - 1.0) / p.gamma, p.q - 1.0)) * sign(t);
}

double soft_threshold(double y, double tau) {
    require_finite(y, "soft_threshold");
    if (!(tau >= 0.0)) throw InvalidInput("soft_threshold: requires tau >= 0");
    const double a = std::abs(y);
    return a <= tau ? 0.0 : (a - tau) * sign(y);
}

double eta(double u, const RegParams& p) {
    return p.alpha * u + p.beta * p.q * std::pow(u + (p.q - 1.0) / p.gamma, p.q - 1.0);
}

std::optional<double> critical_root(double phi_val, const RegParams& p) {
    require_finite(phi_val, "critical_root");
    const double target = std::abs(phi_val);
    if (!(target > p.eta_min()) || p.beta == 0.0) {
        // With beta = 0 the branch degenerates to the linear equation alpha u = -phi.
        if (p.beta == 0.0 && phi_val != 0.0) return -phi_val / p.alpha;
        return std::nullopt;
    }
    const double tol = 1e-12 * std::max(1.0, p.alpha);
    double lo = p.jump_threshold();
    double hi = std::max(10.0, 2.0 * (target + 1.0) / p.alpha);
    // eta is increasing on [lo, inf) and eta(hi) >= alpha hi > target.
    double u = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double r = eta(u, p) - target;
        if (std::abs(r) <= tol) break;
        if (r > 0.0) hi = u; else lo = u;
        const double shifted = u + (p.q - 1.0) / p.gamma;
        const double slope =
            p.alpha + p.beta * p.q * (p.q - 1.0) * std::pow(shifted, p.q - 2.0);
        const double newton = u - r / slope;
        u = (slope > 0.0 && newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
    }
    return phi_val < 0.0 ? u : -u;
}

double scalar_objective(double u, double phi_val, const RegParams& p) {
    return phi_val * u + 0.5 * p.alpha * u * u + p.beta * penalty_density(u, p);
}

double scalar_dc_argmin(double phi_val, const RegParams& p) {
    require_finite(phi_val, "scalar_dc_argmin");
    auto clamp_box = [&](double u) { return std::clamp(u, p.u_a, p.u_b); };

    std::array<double, 6> candidates{0.0, p.u_a, p.u_b, 0.0, 0.0, 0.0};
    std::size_t count = 3;
    if (const auto root = critical_root(phi_val, p)) candidates[count++] = clamp_box(*root);
    // Minimizer of the smoothing-zone branch phi u + alpha/2 u^2 + beta delta |u|.
    const double g = 1.0 / p.gamma;
    const double inner = soft_threshold(-phi_val, p.beta * p.delta()) / p.alpha;
    candidates[count++] = clamp_box(std::clamp(inner, -g, g));

    std::sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(count),
              [](double a, double b) {
                  return std::abs(a) < std::abs(b) || (std::abs(a) == std::abs(b) && a < b);
              });
    double best = 0.0;
    double best_value = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double value = scalar_objective(candidates[k], phi_val, p);
        if (value < best_value) {
            best = candidates[k];
            best_value = value;
        }
    }
    return best;
}

} // namespace lqocp
