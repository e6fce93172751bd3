#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lqocp/config.hpp"
#include "lqocp/eoc_harness.hpp"
#include "lqocp/io.hpp"
#include "lqocp/ocp_solver.hpp"
#include "lqocp/quasi_interp.hpp"
#include "lqocp/selftest.hpp"

namespace fs = std::filesystem;
using namespace lqocp;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericalFailure = 2;

struct CommonArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<double> alpha, beta, q, gamma;
    std::optional<int> n, levels;
    std::optional<std::string> output;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("config", a.config, "INI configuration file (defaults built in)");
    cmd->add_option("--set", a.overrides, "Override a key: section.key=value (repeatable)");
    cmd->add_option("--alpha", a.alpha, "Shorthand for problem.alpha");
    cmd->add_option("--beta", a.beta, "Shorthand for problem.beta");
    cmd->add_option("--q", a.q, "Shorthand for problem.q");
    cmd->add_option("--gamma", a.gamma, "Shorthand for problem.gamma");
    cmd->add_option("--n", a.n, "Shorthand for mesh.n");
    cmd->add_option("--levels", a.levels, "Shorthand for mesh.levels");
    cmd->add_option("--output", a.output, "Shorthand for output.directory");
}

RunConfig resolve(const CommonArgs& a) {
    std::vector<std::string> o = a.overrides;
    auto num = [](double v) { return io::fmt17(v); };
    if (a.alpha) o.push_back("problem.alpha=" + num(*a.alpha));
    if (a.beta) o.push_back("problem.beta=" + num(*a.beta));
    if (a.q) o.push_back("problem.q=" + num(*a.q));
    if (a.gamma) o.push_back("problem.gamma=" + num(*a.gamma));
    if (a.n) o.push_back("mesh.n=" + std::to_string(*a.n));
    if (a.levels) o.push_back("mesh.levels=" + std::to_string(*a.levels));
    if (a.output) o.push_back("output.directory=" + *a.output);
    return load_config(a.config, o);
}

fs::path prepare(const RunConfig& cfg) {
    const fs::path dir = cfg.output_directory();
    fs::create_directories(dir);
    std::ofstream manifest(dir / "manifest.ini");
    write_manifest(manifest, cfg);
    return dir;
}

int cmd_solve(const CommonArgs& args, const std::string& init) {
    RunConfig cfg = resolve(args);
    if (!init.empty()) cfg.init_file = init;
    const fs::path dir = prepare(cfg);
    const MeshPtr mesh = build_uniform_square(cfg.n);
    SolveOptions opts = cfg.solver;
    if (!cfg.init_file.empty()) opts.initial = io::read_p0_csv(cfg.init_file, mesh->num_triangles());
    const ProblemSpec spec = cfg.problem_spec();
    const OcpSolver solver(spec, mesh, opts);

    auto dump = [&](const SolveReport& r) {
        if (cfg.wants("csv")) {
            std::ofstream csv(dir / "report.csv");
            write_report_csv(csv, *mesh, r);
        }
        std::ofstream summary(dir / "summary.txt");
        write_report_summary(summary, r, spec.params);
        if (cfg.wants("vtk"))
            io::write_vtk_file(dir / "fields.vtk", *mesh, {{"y", &r.y.values}, {"phi", &r.phi.values}},
                               {{"u", &r.u.values},
                                {"w", &r.w.values},
                                {"zeta", &r.zeta.values},
                                {"lambda_a", &r.lambda_a.values},
                                {"lambda_b", &r.lambda_b.values}});
    };
    try {
        const SolveReport r = solver.solve();
        dump(r);
        const StructureDiagnostics d = structure_diagnostics(r, spec.params);
        std::printf("converged: outer=%d (dca=%d, polish=%d) inner=%d\n", r.outer_iterations,
                    r.dca_iterations, r.polish_iterations, r.total_inner_iterations);
        std::printf("cost = %.17g\nkkt_residual = %.3e\nfixed_point_residual = %.3e\n",
                    r.cost_history.back(), r.kkt_residual, r.fixed_point_residual);
        std::printf("support_fraction = %.17g\nband_violations = %d\nmin_nonzero_abs_u = %.6g\n",
                    d.support_fraction, d.band_violations, d.min_nonzero_abs);
        std::printf("output: %s\n", dir.string().c_str());
        return kOk;
    } catch (const SolveFailure& e) {
        dump(e.last_report());
        std::fprintf(stderr, "numerical failure: %s (residual %.3e)\n", e.what(), e.residual());
        return kNumericalFailure;
    }
}

int cmd_eoc(const CommonArgs& args, int jobs) {
    const RunConfig cfg = resolve(args);
    const fs::path dir = prepare(cfg);
    LadderConfig ladder = cfg.ladder(jobs);
    if (cfg.wants("csv")) ladder.report_dir = dir / "reports";
    const EocTable table = run_ladder(ladder);
    write_eoc_outputs(dir, table);
    std::ofstream(dir / "eoc_table.txt", std::ios::app)
        << "note: reference = same solver on a mesh refined " << cfg.ref_extra
        << " more times; errors are exact L2 distances of the prolonged P0 controls\n";
    write_eoc_text(std::cout, table);
    bool all_ok = true;
    for (const auto& r : table.rows)
        if (!r.ok) {
            all_ok = false;
            std::fprintf(stderr, "q=%s level %d failed: %s\n", q_label(r.q).c_str(), r.level,
                         r.message.c_str());
        }
    std::printf("output: %s\n", dir.string().c_str());
    return all_ok ? kOk : kNumericalFailure;
}

int cmd_interp(const CommonArgs& args, const std::string& norm_name) {
    const RunConfig cfg = resolve(args);
    InterpNorm norm;
    if (norm_name == "l1") norm = InterpNorm::l1;
    else if (norm_name == "l2") norm = InterpNorm::l2;
    else throw ConfigError("interp-study: --norm must be l1 or l2");
    const fs::path dir = prepare(cfg);
    std::vector<MeshPtr> ladder{build_uniform_square(cfg.interp_n)};
    for (int l = 1; l < cfg.interp_levels; ++l) ladder.push_back(refine_uniform(ladder.back()));
    const InterpStudyResult r = interp_error_study(ladder, cfg.interp_target());
    std::ofstream csv(dir / "interp.csv");
    write_interp_csv(csv, r, norm);
    write_interp_csv(std::cout, r, norm);
    std::printf("exponent_l1 = %.6f\nexponent_l2 = %.6f\noutput: %s\n", r.exponent_l1,
                r.exponent_l2, dir.string().c_str());
    return kOk;
}

int cmd_selftest() {
    bool ok = true;
    for (const auto& c : run_scalar_selftest()) {
        std::printf("%s %-20s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        ok = ok && c.passed;
    }
    return ok ? kOk : kNumericalFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse L^q optimal control solver with finite elements"};
    app.require_subcommand(1);

    CommonArgs solve_args, eoc_args, interp_args;
    std::string init;
    int jobs = 1;
    std::string norm = "l1";

    auto* solve = app.add_subcommand("solve", "Solve one discrete problem");
    add_common(solve, solve_args);
    solve->add_option("--init", init, "Starting control, CSV with columns element,u");

    auto* eoc_cmd = app.add_subcommand("eoc", "Refinement ladder and EOC table");
    add_common(eoc_cmd, eoc_args);
    eoc_cmd->add_option("--jobs", jobs, "Concurrent solves")->check(CLI::PositiveNumber);

    auto* interp = app.add_subcommand("interp-study", "Quasi-interpolation error study");
    add_common(interp, interp_args);
    interp->add_option("--norm", norm, "Norm whose exponent goes into the CSV (l1|l2)");

    auto* selftest = app.add_subcommand("selftest", "Property suite of the scalar layer");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (*solve) return cmd_solve(solve_args, init);
        if (*eoc_cmd) return cmd_eoc(eoc_args, jobs);
        if (*interp) return cmd_interp(interp_args, norm);
        if (*selftest) return cmd_selftest();
    } catch (const InvalidInput& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kConfigError;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s (residual %.3e)\n", e.what(), e.residual());
        return kNumericalFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumericalFailure;
    }
    return kConfigError;
}
