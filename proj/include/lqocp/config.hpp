#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lqocp/eoc_harness.hpp"
#include "lqocp/ocp_solver.hpp"
#include "lqocp/quasi_interp.hpp"

namespace lqocp {

/// Invalid or unreadable run configuration.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// Resolved run configuration. Sections and keys:
///   [problem] alpha beta q gamma u_a u_b c0 y_d f, plus y_d_<param>, f_<param>
///   [mesh]    n levels ref_extra
///   [solver]  tol_outer tol_inner max_outer max_inner damping inner_method
///             linear_solver polish init
///   [eoc]     q_values
///   [interp]  function n levels, plus function_<param>
///   [output]  directory formats
struct RunConfig {
    RegParams params;
    double c0 = 0.0;
    std::string yd = "corner-gaussian";
    std::map<std::string, double> yd_params;
    std::string f = "zero";
    std::map<std::string, double> f_params;

    int n = 32;
    int levels = 4;
    int ref_extra = 2;

    SolveOptions solver;
    std::filesystem::path init_file; // optional per-element starting control

    std::vector<double> q_values{0.5, 0.41, 0.38, 0.31};

    std::string interp_function = "disk-indicator";
    std::map<std::string, double> interp_params;
    int interp_n = 8;
    int interp_levels = 4;

    std::filesystem::path directory = "runs/default";
    std::vector<std::string> formats{"csv", "vtk"};

    /// Throws ConfigError naming the violated invariant.
    void validate() const;

    [[nodiscard]] ProblemSpec problem_spec() const;
    [[nodiscard]] LadderConfig ladder(int jobs = 1) const;
    [[nodiscard]] Function2D interp_target() const;
    [[nodiscard]] bool wants(const std::string& format) const;
    /// directory, resolved against $LQOCP_OUTPUT_ROOT when relative and set.
    [[nodiscard]] std::filesystem::path output_directory() const;
};

/// Built-in defaults, overlaid with the INI file (if non-empty) and then with
/// "section.key=value" overrides, then validated.
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});
RunConfig parse_config(std::istream& is, const std::vector<std::string>& overrides = {});

/// INI echo of every resolved field; parse_config reads it back unchanged.
void write_manifest(std::ostream& os, const RunConfig& cfg);

} // namespace lqocp
