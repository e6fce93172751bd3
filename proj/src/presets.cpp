#include "lqocp/presets.hpp"

#include <cmath>
#include <numbers>

namespace lqocp {

namespace {

double get(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

} // namespace

Function2D make_preset(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "zero") return Function2D{};
    if (name == "corner-gaussian")
        return {[](double x, double y) { return 10.0 * std::exp(-5.0 * (x * x + y * y)); }, name};
    if (name == "sine-product") {
        const double a = get(params, "amplitude", 1.0);
        return {[a](double x, double y) {
                    return a * std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
                },
                name};
    }
    if (name == "custom-gaussian") {
        const double a = get(params, "amplitude", 1.0), rate = get(params, "rate", 1.0);
        const double cx = get(params, "cx", 0.5), cy = get(params, "cy", 0.5);
        if (!(rate >= 0.0)) throw InvalidInput("custom-gaussian: requires rate >= 0");
        return {[=](double x, double y) {
                    return a * std::exp(-rate * ((x - cx) * (x - cx) + (y - cy) * (y - cy)));
                },
                name};
    }
    if (name == "disk-indicator") {
        const double r = get(params, "radius", 0.3);
        const double cx = get(params, "cx", 0.5), cy = get(params, "cy", 0.5);
        if (!(r > 0.0)) throw InvalidInput("disk-indicator: requires radius > 0");
        return {[=](double x, double y) {
                    return (x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r ? 1.0 : 0.0;
                },
                name, true};
    }
    throw InvalidInput("unknown function preset '" + name + "'");
}

} // namespace lqocp
