#include "lqocp/eoc_harness.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "lqocp/io.hpp"

namespace lqocp {

std::optional<double> eoc(double e1, double e2, double h1, double h2) {
    const bool valid = std::isfinite(e1) && std::isfinite(e2) && std::isfinite(h1) &&
                       std::isfinite(h2) && e1 > 0.0 && e2 > 0.0 && h1 > 0.0 && h2 > 0.0 &&
                       h1 != h2;
    if (!valid) return std::nullopt;
    return (std::log(e1) - std::log(e2)) / (std::log(h1) - std::log(h2));
}

fem::P0Field transfer_p0(const fem::P0Field& coarse, const MeshPtr& fine) {
    return fem::prolong(coarse, fine);
}

double transfer_error(const fem::P0Field& coarse, const fem::P0Field& fine) {
    fem::P0Field diff = transfer_p0(coarse, fine.mesh);
    for (std::size_t t = 0; t < diff.values.size(); ++t) diff.values[t] -= fine.values[t];
    return fem::l2_norm(diff);
}

void LadderConfig::validate() const {
    if (base_n < 1) throw InvalidInput("LadderConfig: requires base n >= 1");
    if (levels < 3) throw InvalidInput("LadderConfig: requires levels >= 3");
    if (ref_extra < 1) throw InvalidInput("LadderConfig: requires ref_extra >= 1");
    if (q_values.empty()) throw InvalidInput("LadderConfig: q sweep is empty");
    if (jobs < 1) throw InvalidInput("LadderConfig: requires jobs >= 1");
    for (double q : q_values) {
        RegParams p = spec.params;
        p.q = q;
        p.validate();
    }
    options.validate();
}

std::vector<const EocRow*> EocTable::rows_for(double q) const {
    std::vector<const EocRow*> out;
    for (const auto& r : rows)
        if (r.q == q) out.push_back(&r);
    return out;
}

std::optional<double> EocTable::mean_eoc(double q, int pairs) const {
    const auto r = rows_for(q);
    if (static_cast<int>(r.size()) < pairs + 1) return std::nullopt;
    double sum = 0.0;
    for (std::size_t k = r.size() - static_cast<std::size_t>(pairs); k < r.size(); ++k) {
        if (!r[k]->eoc) return std::nullopt;
        sum += *r[k]->eoc;
    }
    return sum / pairs;
}

std::string q_label(double q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

void write_report_csv(std::ostream& os, const TriMesh& mesh, const SolveReport& r) {
    os << "element,x,y,u,w,zeta,lambda_a,lambda_b,phi_bar\n";
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const Point2 b = mesh.barycenter(t);
        os << t << ',' << io::fmt17(b.x) << ',' << io::fmt17(b.y) << ',' << io::fmt17(r.u.values[t])
           << ',' << io::fmt17(r.w.values[t]) << ',' << io::fmt17(r.zeta.values[t]) << ','
           << io::fmt17(r.lambda_a.values[t]) << ',' << io::fmt17(r.lambda_b.values[t]) << ','
           << io::fmt17(r.phi_bar.values[t]) << '\n';
    }
}

void write_report_summary(std::ostream& os, const SolveReport& r, const RegParams& p) {
    const StructureDiagnostics d = structure_diagnostics(r, p);
    os << "converged = " << (r.converged ? "true" : "false") << '\n'
       << "outer_iterations = " << r.outer_iterations << '\n'
       << "dca_iterations = " << r.dca_iterations << '\n'
       << "polish_iterations = " << r.polish_iterations << '\n'
       << "total_inner_iterations = " << r.total_inner_iterations << '\n'
       << "final_cost = " << io::fmt17(r.cost_history.empty() ? NAN : r.cost_history.back()) << '\n'
       << "kkt_residual = " << io::fmt17(r.kkt_residual) << '\n'
       << "fixed_point_residual = " << io::fmt17(r.fixed_point_residual) << '\n'
       << "max_cost_increase = " << io::fmt17(r.max_cost_increase) << '\n'
       << "support_element_count = " << r.support_element_count << '\n'
       << "support_fraction = " << io::fmt17(d.support_fraction) << '\n'
       << "min_nonzero_abs_u = " << io::fmt17(d.min_nonzero_abs) << '\n'
       << "jump_threshold = " << io::fmt17(d.jump_threshold) << '\n'
       << "band_violations = " << d.band_violations << '\n'
       << "lower_bound_margin = " << io::fmt17(d.lower_margin) << '\n'
       << "upper_bound_margin = " << io::fmt17(d.upper_margin) << '\n'
       << "support_ratio_to_threshold = " << io::fmt17(d.scc_ratio) << '\n'
       << "cost_history =";
    for (double c : r.cost_history) os << ' ' << io::fmt17(c);
    os << '\n';
}

namespace {

struct TaskResult {
    bool ok = false;
    std::string message;
    fem::P0Field u;
    int outer_iters = 0;
    double kkt = std::numeric_limits<double>::quiet_NaN();
    double support_fraction = std::numeric_limits<double>::quiet_NaN();
};

} // namespace

EocTable run_ladder(const LadderConfig& cfg) {
    cfg.validate();
    std::vector<MeshPtr> meshes{build_uniform_square(cfg.base_n)};
    for (int l = 1; l < cfg.levels + cfg.ref_extra; ++l) meshes.push_back(refine_uniform(meshes.back()));
    const std::size_t ref_index = static_cast<std::size_t>(cfg.levels + cfg.ref_extra - 1);
    const std::size_t nlevels = static_cast<std::size_t>(cfg.levels);

    // Only the ladder levels and the reference mesh are solved on.
    std::vector<std::shared_ptr<const fem::EllipticSolver>> elliptic(meshes.size());
    for (std::size_t m = 0; m < meshes.size(); ++m)
        if (m < nlevels || m == ref_index)
            elliptic[m] = std::make_shared<const fem::EllipticSolver>(
                meshes[m], cfg.spec.coeffs, cfg.options.linear_solver);

    if (cfg.report_dir) std::filesystem::create_directories(*cfg.report_dir);

    struct Task {
        std::size_t q_index;
        std::size_t mesh_index;
    };
    std::vector<Task> tasks;
    for (std::size_t qi = 0; qi < cfg.q_values.size(); ++qi) tasks.push_back({qi, ref_index});
    for (std::size_t qi = 0; qi < cfg.q_values.size(); ++qi)
        for (std::size_t l = 0; l < nlevels; ++l) tasks.push_back({qi, l});
    std::vector<TaskResult> results(tasks.size());

    auto run = [&](std::size_t k) {
        const Task& task = tasks[k];
        TaskResult& out = results[k];
        ProblemSpec spec = cfg.spec;
        spec.params.q = cfg.q_values[task.q_index];
        try {
            const OcpSolver solver(spec, meshes[task.mesh_index], cfg.options,
                                   elliptic[task.mesh_index]);
            const SolveReport report = solver.solve();
            out.ok = true;
            out.u = report.u;
            out.outer_iters = report.outer_iterations;
            out.kkt = report.kkt_residual;
            out.support_fraction = structure_diagnostics(report, spec.params).support_fraction;
            if (cfg.report_dir && task.mesh_index < nlevels) {
                const std::string stem = "q" + q_label(spec.params.q) + "_level" +
                                         std::to_string(task.mesh_index);
                std::ofstream csv(*cfg.report_dir / (stem + ".csv"));
                write_report_csv(csv, *meshes[task.mesh_index], report);
                std::ofstream summary(*cfg.report_dir / (stem + ".txt"));
                write_report_summary(summary, report, spec.params);
            }
        } catch (const SolveFailure& e) {
            out.message = e.what();
            out.outer_iters = e.last_report().outer_iterations;
            out.kkt = e.last_report().kkt_residual;
        } catch (const std::exception& e) {
            out.message = e.what();
        }
    };

    const int workers = std::min<int>(cfg.jobs, static_cast<int>(tasks.size()));
    if (workers <= 1) {
        for (std::size_t k = 0; k < tasks.size(); ++k) run(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < tasks.size(); k = next++) run(k);
            });
        for (auto& t : pool) t.join();
    }

    EocTable table;
    const MeshPtr& ref_mesh = meshes[ref_index];
    for (std::size_t qi = 0; qi < cfg.q_values.size(); ++qi) {
        const double q = cfg.q_values[qi];
        const TaskResult& ref = results[qi];
        table.references.push_back({q, cfg.base_n << (cfg.levels + cfg.ref_extra - 1),
                                    ref_mesh->mesh_size(), ref.ok, ref.outer_iters, ref.kkt,
                                    ref.message});
        for (std::size_t l = 0; l < nlevels; ++l) {
            const TaskResult& res = results[cfg.q_values.size() + qi * nlevels + l];
            EocRow row;
            row.q = q;
            row.level = static_cast<int>(l);
            row.n = cfg.base_n << l;
            row.h = meshes[l]->mesh_size();
            row.outer_iters = res.outer_iters;
            row.kkt_residual = res.kkt;
            row.support_fraction = res.support_fraction;
            row.ok = res.ok && ref.ok;
            row.message = !res.ok ? res.message : (!ref.ok ? "reference: " + ref.message : "");
            row.error_l2 = row.ok ? transfer_error(res.u, ref.u)
                                  : std::numeric_limits<double>::quiet_NaN();
            if (l > 0) {
                const EocRow& prev = table.rows.back();
                row.eoc = eoc(prev.error_l2, row.error_l2, prev.h, row.h);
            }
            table.rows.push_back(row);
        }
    }
    return table;
}

void write_eoc_csv(std::ostream& os, const EocTable& table) {
    os << "q,level,n,h,error_l2,eoc,outer_iters,kkt_residual,support_fraction\n";
    for (const auto& r : table.rows)
        os << io::fmt17(r.q) << ',' << r.level << ',' << r.n << ',' << io::fmt17(r.h) << ','
           << io::fmt17(r.error_l2) << ',' << (r.eoc ? io::fmt17(*r.eoc) : std::string{}) << ','
           << r.outer_iters << ',' << io::fmt17(r.kkt_residual) << ','
           << io::fmt17(r.support_fraction) << '\n';
}

void write_eoc_text(std::ostream& os, const EocTable& table) {
    std::vector<double> qs;
    for (const auto& r : table.rows)
        if (std::find(qs.begin(), qs.end(), r.q) == qs.end()) qs.push_back(r.q);
    std::map<int, std::map<double, const EocRow*>> by_level;
    std::map<int, double> h_of;
    for (const auto& r : table.rows) {
        by_level[r.level][r.q] = &r;
        h_of[r.level] = r.h;
    }
    os << "h       ";
    for (double q : qs) os << " | q=" << q_label(q) << " error   EOC";
    os << '\n';
    for (const auto& [level, cells] : by_level) {
        os << io::fmt4(h_of[level]) << "  ";
        for (double q : qs) {
            const auto it = cells.find(q);
            const EocRow* r = it == cells.end() ? nullptr : it->second;
            os << " | " << (r ? io::fmt4(r->error_l2) : std::string("-")) << "  "
               << (r && r->eoc ? io::fmt4(*r->eoc) : std::string("-"));
        }
        os << '\n';
    }
}

void write_gnuplot(std::ostream& os, const EocTable& table, double q) {
    os << "# -log(h) -log(error) q=" << q_label(q) << '\n';
    for (const EocRow* r : table.rows_for(q))
        if (r->ok && r->error_l2 > 0.0)
            os << io::fmt17(-std::log(r->h)) << ' ' << io::fmt17(-std::log(r->error_l2)) << '\n';
}

void write_eoc_outputs(const std::filesystem::path& dir, const EocTable& table) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "eoc.csv");
        write_eoc_csv(os, table);
    }
    {
        std::ofstream os(dir / "eoc_table.txt");
        write_eoc_text(os, table);
        for (const auto& ref : table.references)
            os << "reference q=" << q_label(ref.q) << ": n=" << ref.n << " h=" << io::fmt17(ref.h)
               << (ref.ok ? " converged" : " FAILED: " + ref.message) << '\n';
    }
    std::vector<double> qs;
    for (const auto& r : table.rows)
        if (std::find(qs.begin(), qs.end(), r.q) == qs.end()) qs.push_back(r.q);
    for (double q : qs) {
        std::ofstream os(dir / ("eoc_q" + q_label(q) + ".dat"));
        write_gnuplot(os, table, q);
    }
}

} // namespace lqocp
