#pragma once

#include <map>
#include <string>

#include "lqocp/common.hpp"

namespace lqocp {

/// Named functions for y_d and f:
///   zero
///   corner-gaussian   10 exp(-5 (x^2 + y^2))
///   sine-product      amplitude sin(pi x) sin(pi y)
///   custom-gaussian   amplitude exp(-rate ((x-cx)^2 + (y-cy)^2))
///   disk-indicator    1 on the disk of radius `radius` around (cx, cy)
/// Unused parameters are ignored; unknown names throw InvalidInput.
Function2D make_preset(const std::string& name, const std::map<std::string, double>& params = {});

} // namespace lqocp
