#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lqocp {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }

/// A scalar function on the plane. An empty function is the zero function.
///
/// `discontinuous` marks inputs such as indicator functions; integration
/// routines then switch from a fixed quadrature rule to adaptive subdivision.
struct Function2D {
    std::function<double(double, double)> eval;
    bool discontinuous = false;
    std::string name;

    Function2D() = default;
    Function2D(std::function<double(double, double)> f, std::string label = {},
               bool jumps = false)
        : eval(std::move(f)), discontinuous(jumps), name(std::move(label)) {}

    [[nodiscard]] bool is_zero() const { return !eval; }
    double operator()(Point2 p) const { return eval ? eval(p.x, p.y) : 0.0; }
    double operator()(double x, double y) const { return eval ? eval(x, y) : 0.0; }
};

/// Invalid input data: bad parameters, mismatched meshes, malformed files.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative method did not reach its tolerance.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double residual, std::vector<double> trace = {})
        : std::runtime_error(what), residual_(residual), trace_(std::move(trace)) {}

    [[nodiscard]] double residual() const { return residual_; }
    [[nodiscard]] const std::vector<double>& trace() const { return trace_; }

private:
    double residual_;
    std::vector<double> trace_;
};

} // namespace lqocp
