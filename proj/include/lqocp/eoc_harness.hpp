#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lqocp/fem.hpp"
#include "lqocp/ocp_solver.hpp"

namespace lqocp {

/// [log e1 - log e2] / [log h1 - log h2]; nullopt unless all inputs are
/// positive and finite and h1 != h2.
std::optional<double> eoc(double e1, double e2, double h1, double h2);

/// Coarse P0 field as a field on a descendant mesh (constant on children).
fem::P0Field transfer_p0(const fem::P0Field& coarse, const MeshPtr& fine);

/// ||prolong(coarse) - fine||_{L2}, evaluated exactly on the fine mesh.
double transfer_error(const fem::P0Field& coarse, const fem::P0Field& fine);

struct LadderConfig {
    int base_n = 32;
    int levels = 4;
    int ref_extra = 2;
    ProblemSpec spec;
    SolveOptions options;
    std::vector<double> q_values{0.5, 0.41, 0.38, 0.31};
    int jobs = 1;
    /// Per-element reports of the ladder levels go to <dir>/reports when set.
    std::optional<std::filesystem::path> report_dir;

    void validate() const;
};

struct EocRow {
    double q = 0.0;
    int level = 0;
    int n = 0;
    double h = 0.0;
    double error_l2 = 0.0;         // NaN when the level or reference failed
    std::optional<double> eoc;     // from level 1 onward
    int outer_iters = 0;
    double kkt_residual = 0.0;
    double support_fraction = 0.0;
    bool ok = true;
    std::string message;
};

struct ReferenceInfo {
    double q = 0.0;
    int n = 0;
    double h = 0.0;
    bool ok = true;
    int outer_iters = 0;
    double kkt_residual = 0.0;
    std::string message;
};

struct EocTable {
    std::vector<EocRow> rows;            // sorted by (q order of the config, level)
    std::vector<ReferenceInfo> references;

    [[nodiscard]] std::vector<const EocRow*> rows_for(double q) const;
    /// Mean of the last `pairs` EOC cells for q; nullopt if any is missing.
    [[nodiscard]] std::optional<double> mean_eoc(double q, int pairs = 3) const;
};

/// Solves every (q, level) pair and the 2^ref_extra finer reference, then
/// fills the table. Individual failures mark their row and the sweep continues.
EocTable run_ladder(const LadderConfig& cfg);

/// CSV columns: q, level, n, h, error_l2, eoc, outer_iters, kkt_residual, support_fraction.
void write_eoc_csv(std::ostream& os, const EocTable& table);
/// Rows per level, one error/EOC column pair per q, 4 decimals.
void write_eoc_text(std::ostream& os, const EocTable& table);
/// Two columns per line: -log(h) and -log(error).
void write_gnuplot(std::ostream& os, const EocTable& table, double q);

/// eoc.csv, eoc_table.txt, eoc_q<q>.dat in `dir`.
void write_eoc_outputs(const std::filesystem::path& dir, const EocTable& table);

/// Per-element report table: element, x, y, u, w, zeta, lambda_a, lambda_b, phi_bar.
void write_report_csv(std::ostream& os, const TriMesh& mesh, const SolveReport& report);
/// Scalar summary of a report, one key = value per line.
void write_report_summary(std::ostream& os, const SolveReport& report, const RegParams& p);

/// Label used in file names, e.g. 0.5 -> "0.5", 0.31 -> "0.31".
std::string q_label(double q);

} // namespace lqocp
