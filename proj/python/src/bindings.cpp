#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "lqocp/eoc_harness.hpp"
#include "lqocp/ocp_solver.hpp"
#include "lqocp/presets.hpp"
#include "lqocp/quasi_interp.hpp"
#include "lqocp/scalar_reg.hpp"
#include "lqocp/selftest.hpp"

namespace py = pybind11;
using namespace lqocp;

namespace {

py::dict solve_square(int n, const RegParams& params, const std::string& yd,
                      const std::map<std::string, double>& yd_params, double tol_outer,
                      double tol_inner) {
    ProblemSpec spec;
    spec.params = params;
    spec.yd = make_preset(yd, yd_params);
    SolveOptions opts;
    opts.tol_outer = tol_outer;
    opts.tol_inner = tol_inner;
    const MeshPtr mesh = build_uniform_square(n);
    SolveReport r;
    {
        py::gil_scoped_release release;
        r = OcpSolver(spec, mesh, opts).solve();
    }
    const StructureDiagnostics d = structure_diagnostics(r, params);
    py::dict out;
    out["u"] = r.u.values;
    out["y"] = r.y.values;
    out["phi"] = r.phi.values;
    out["w"] = r.w.values;
    out["cost"] = r.cost_history.back();
    out["cost_history"] = r.cost_history;
    out["outer_iterations"] = r.outer_iterations;
    out["kkt_residual"] = r.kkt_residual;
    out["fixed_point_residual"] = r.fixed_point_residual;
    out["support_fraction"] = d.support_fraction;
    out["band_violations"] = d.band_violations;
    return out;
}

py::dict interp_study(const std::string& function, const std::map<std::string, double>& params,
                      int n, int levels) {
    std::vector<MeshPtr> ladder{build_uniform_square(n)};
    for (int l = 1; l < levels; ++l) ladder.push_back(refine_uniform(ladder.back()));
    const InterpStudyResult r = interp_error_study(ladder, make_preset(function, params));
    py::dict out;
    out["h"] = r.h;
    out["error_l1"] = r.error_l1;
    out["error_l2"] = r.error_l2;
    out["exponent_l1"] = r.exponent_l1;
    out["exponent_l2"] = r.exponent_l2;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sparse L^q optimal control with piecewise constant controls";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<RegParams>(m, "RegParams")
        .def(py::init([](double q, double gamma, double alpha, double beta, double u_a, double u_b) {
                 RegParams p{q, gamma, alpha, beta, u_a, u_b};
                 p.validate();
                 return p;
             }),
             py::arg("q") = 0.5, py::arg("gamma") = 16000.0, py::arg("alpha") = 0.24,
             py::arg("beta") = 0.0002, py::arg("u_a") = -0.8, py::arg("u_b") = 0.55)
        .def_readwrite("q", &RegParams::q)
        .def_readwrite("gamma", &RegParams::gamma)
        .def_readwrite("alpha", &RegParams::alpha)
        .def_readwrite("beta", &RegParams::beta)
        .def_readwrite("u_a", &RegParams::u_a)
        .def_readwrite("u_b", &RegParams::u_b)
        .def("validate", &RegParams::validate)
        .def_property_readonly("delta", &RegParams::delta)
        .def_property_readonly("lipschitz_j", &RegParams::lipschitz_j)
        .def_property_readonly("s_star", &RegParams::s_star)
        .def_property_readonly("jump_threshold", &RegParams::jump_threshold)
        .def_property_readonly("eta_min", &RegParams::eta_min);

    m.def("huber", &huber, py::arg("t"), py::arg("params"));
    m.def("penalty_density", &penalty_density, py::arg("t"), py::arg("params"));
    m.def("j_func", &j_func, py::arg("t"), py::arg("params"));
    m.def("soft_threshold", &soft_threshold, py::arg("y"), py::arg("tau"));
    m.def("critical_root", &critical_root, py::arg("phi"), py::arg("params"));
    m.def("scalar_objective", &scalar_objective, py::arg("u"), py::arg("phi"), py::arg("params"));
    m.def("scalar_dc_argmin", &scalar_dc_argmin, py::arg("phi"), py::arg("params"));
    m.def("eoc", &eoc, py::arg("e1"), py::arg("e2"), py::arg("h1"), py::arg("h2"));

    m.def("solve_square", &solve_square, py::arg("n"), py::arg("params") = RegParams{},
          py::arg("y_d") = "corner-gaussian", py::arg("y_d_params") = std::map<std::string, double>{},
          py::arg("tol_outer") = 1e-9, py::arg("tol_inner") = 1e-10,
          "Solve the discrete problem on the uniform n x n unit-square mesh.");
    m.def("interp_study", &interp_study, py::arg("function") = "disk-indicator",
          py::arg("params") = std::map<std::string, double>{}, py::arg("n") = 8, py::arg("levels") = 4);
    m.def("selftest", [](std::uint64_t seed, int draws) {
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& c : run_scalar_selftest(seed, draws)) out.emplace_back(c.name, c.passed, c.detail);
        return out;
    }, py::arg("seed") = 20240611, py::arg("draws") = 200);
}
