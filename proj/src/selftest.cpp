#include "lqocp/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "lqocp/scalar_reg.hpp"

namespace lqocp {

namespace {

SelftestCheck make(const std::string& name, long failures, const std::string& what) {
    std::ostringstream os;
    os << failures << " violation(s) " << what;
    return {name, failures == 0, os.str()};
}

} // namespace

std::vector<SelftestCheck> run_scalar_selftest(std::uint64_t seed, int draws) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<SelftestCheck> out;

    long bound = 0, lipschitz = 0, odd = 0;
    for (double q : {0.31, 0.5})
        for (double gamma : {1e3, 16000.0}) {
            RegParams p;
            p.q = q;
            p.gamma = gamma;
            const double delta = p.delta(), lj = p.lipschitz_j();
            for (int k = 0; k < 20 * draws; ++k) {
                // Half the samples land near the smoothing zone where j bends.
                const double scale = (k % 2) ? 4.0 / gamma : 2.0;
                const double t1 = scale * (2.0 * unit(rng) - 1.0);
                const double t2 = scale * (2.0 * unit(rng) - 1.0);
                const double j1 = j_func(t1, p), j2 = j_func(t2, p);
                if (std::abs(j1) > delta * (1.0 + 1e-14)) ++bound;
                if (std::abs(j1 - j2) > lj * std::abs(t1 - t2) * (1.0 + 1e-12) + 1e-12) ++lipschitz;
                if (j_func(-t1, p) != -j1) ++odd;
            }
        }
    out.push_back(make("j_bound", bound, "of |j| <= delta_gamma"));
    out.push_back(make("j_lipschitz", lipschitz, "of the Lipschitz bound 2 gamma delta/q"));
    out.push_back(make("j_odd", odd, "of j(-t) = -j(t)"));

    long continuity = 0, even = 0;
    for (double q : {0.31, 0.5, 0.9}) {
        RegParams p;
        p.q = q;
        const double g = 1.0 / p.gamma;
        const double left = huber(std::nextafter(g, 0.0), p), right = huber(std::nextafter(g, 1.0), p);
        if (std::abs(left - right) > 1e-12 * std::max(1.0, right)) ++continuity;
        for (int k = 0; k < draws; ++k) {
            const double t = 3.0 * unit(rng);
            if (huber(t, p) != huber(-t, p)) ++even;
        }
    }
    out.push_back(make("huber_continuous", continuity, "of continuity at 1/gamma"));
    out.push_back(make("huber_even", even, "of huber(-t) = huber(t)"));

    long grid = 0, jump = 0, symmetric = 0;
    for (int k = 0; k < draws; ++k) {
        RegParams p;
        p.q = 0.1 + 0.8 * unit(rng);
        p.gamma = std::pow(10.0, 2.0 + 2.5 * unit(rng));
        p.alpha = 0.05 + 0.95 * unit(rng);
        p.beta = std::pow(10.0, -4.0 + 3.0 * unit(rng));
        p.u_a = -(0.1 + 1.9 * unit(rng));
        p.u_b = 0.1 + 1.9 * unit(rng);
        const double phi = 2.0 * (2.0 * unit(rng) - 1.0);
        const double u = scalar_dc_argmin(phi, p);
        const double fu = scalar_objective(u, phi, p);
        // Coarse grid search: no grid point may beat the returned value.
        const int steps = 20000;
        for (int s = 0; s <= steps; ++s) {
            const double v = p.u_a + (p.u_b - p.u_a) * s / steps;
            if (scalar_objective(v, phi, p) < fu - 1e-12) {
                ++grid;
                break;
            }
        }
        const bool at_bound = u == p.u_a || u == p.u_b;
        if (u != 0.0 && !at_bound && std::abs(u) < p.jump_threshold()) ++jump;
        RegParams mirrored = p;
        mirrored.u_a = -p.u_b;
        mirrored.u_b = -p.u_a;
        if (std::abs(scalar_dc_argmin(-phi, mirrored) + u) > 1e-12) ++symmetric;
    }
    out.push_back(make("argmin_vs_grid", grid, "where a grid point beats scalar_dc_argmin"));
    out.push_back(make("argmin_jump_bound", jump, "of |u| >= s* + (1-q)/gamma off the box bounds"));
    out.push_back(make("argmin_odd", symmetric, "of odd symmetry under box mirroring"));
    return out;
}

} // namespace lqocp
