#pragma once

#include <iosfwd>
#include <vector>

#include "lqocp/common.hpp"
#include "lqocp/fem.hpp"
#include "lqocp/mesh.hpp"

namespace lqocp {

/// Elementwise means u_T = (1/|T|) int_T u, by the degree-4 rule on the four
/// red children of T (adaptive subdivision for discontinuous u).
fem::P0Field project_p0(const MeshPtr& mesh, const Function2D& u);

/// Hat-function weighted patch means pi_i(u) = int u phi_i / int phi_i,
/// at every vertex including the boundary ones.
fem::P1Field weighted_quasi_interp_p1(const MeshPtr& mesh, const Function2D& u);

/// int_T (u - u_T) per element, with int_T u evaluated on a
/// three-level subdivision of T (a finer rule than the one defining u_T).
std::vector<double> orthogonality_residual(const MeshPtr& mesh, const Function2D& u);

enum class InterpNorm { l1, l2 };

struct InterpStudyResult {
    std::vector<int> levels;
    std::vector<double> h;
    std::vector<double> error_l1;
    std::vector<double> error_l2;
    double exponent_l1 = 0.0;
    double exponent_l2 = 0.0;

    [[nodiscard]] double exponent(InterpNorm norm) const {
        return norm == InterpNorm::l1 ? exponent_l1 : exponent_l2;
    }
};

/// ||u - Pi_h u|| in L1 and L2 on each mesh of the ladder, and the
/// least-squares slope of log(error) against log(h). Requires >= 3 meshes
/// with strictly decreasing h.
InterpStudyResult interp_error_study(const std::vector<MeshPtr>& ladder, const Function2D& u);

/// Columns: level, h, error_L1, error_L2, fitted_exponent (of `norm`).
void write_interp_csv(std::ostream& os, const InterpStudyResult& r, InterpNorm norm);

/// Least-squares slope of log(y) against log(x).
double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace lqocp
