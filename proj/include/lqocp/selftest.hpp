#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lqocp {

struct SelftestCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Property suite of the pointwise regularizer: bound and Lipschitz
/// continuity of j, continuity and evenness of huber, odd symmetry of the
/// scalar minimizer, the jump bound, and agreement of scalar_dc_argmin with
/// a grid search. Deterministic for a fixed seed.
std::vector<SelftestCheck> run_scalar_selftest(std::uint64_t seed = 20240611, int draws = 200);

} // namespace lqocp
