#include "lqocp/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lqocp/io.hpp"
#include "lqocp/presets.hpp"

namespace lqocp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string where(const std::string& section, const std::string& key) {
    return section + "." + key;
}

double to_double(const std::string& section, const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (trim(text.substr(used)).empty() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("config: " + where(section, key) + " = '" + text + "' is not a finite number");
}

int to_int(const std::string& section, const std::string& key, const std::string& text) {
    const double v = to_double(section, key, text);
    if (v != std::floor(v) || std::abs(v) > 1e9)
        throw ConfigError("config: " + where(section, key) + " must be an integer");
    return static_cast<int>(v);
}

bool to_bool(const std::string& section, const std::string& key, const std::string& text) {
    if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
    if (text == "false" || text == "no" || text == "0" || text == "off") return false;
    throw ConfigError("config: " + where(section, key) + " must be true or false");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty()) out.push_back(trim(item));
    return out;
}

void set_key(RunConfig& c, const std::string& section, const std::string& key,
             const std::string& raw) {
    const std::string v = trim(raw);
    auto num = [&] { return to_double(section, key, v); };
    auto integer = [&] { return to_int(section, key, v); };
    if (section == "problem") {
        if (key == "alpha") c.params.alpha = num();
        else if (key == "beta") c.params.beta = num();
        else if (key == "q") c.params.q = num();
        else if (key == "gamma") c.params.gamma = num();
        else if (key == "u_a") c.params.u_a = num();
        else if (key == "u_b") c.params.u_b = num();
        else if (key == "c0") c.c0 = num();
        else if (key == "y_d") c.yd = v;
        else if (key == "f") c.f = v;
        else if (key.rfind("y_d_", 0) == 0) c.yd_params[key.substr(4)] = num();
        else if (key.rfind("f_", 0) == 0) c.f_params[key.substr(2)] = num();
        else throw ConfigError("config: unknown key " + where(section, key));
    } else if (section == "mesh") {
        if (key == "n") c.n = integer();
        else if (key == "levels") c.levels = integer();
        else if (key == "ref_extra") c.ref_extra = integer();
        else throw ConfigError("config: unknown key " + where(section, key));
    } else if (section == "solver") {
        if (key == "tol_outer") c.solver.tol_outer = num();
        else if (key == "tol_inner") c.solver.tol_inner = num();
        else if (key == "max_outer") c.solver.max_outer = integer();
        else if (key == "max_inner") c.solver.max_inner = integer();
        else if (key == "damping") c.solver.damping = num();
        else if (key == "polish") c.solver.pointwise_polish = to_bool(section, key, v);
        else if (key == "init") c.init_file = v;
        else if (key == "inner_method") {
            if (v == "semi-smooth-newton") c.solver.inner_method = InnerMethod::semi_smooth_newton;
            else if (v == "picard") c.solver.inner_method = InnerMethod::picard;
            else throw ConfigError("config: solver.inner_method must be semi-smooth-newton or picard");
        } else if (key == "linear_solver") {
            if (v == "direct") c.solver.linear_solver = fem::LinearSolverKind::direct;
            else if (v == "pcg") c.solver.linear_solver = fem::LinearSolverKind::pcg;
            else throw ConfigError("config: solver.linear_solver must be direct or pcg");
        } else throw ConfigError("config: unknown key " + where(section, key));
    } else if (section == "eoc") {
        if (key == "q_values") {
            c.q_values.clear();
            for (const auto& item : split_list(v)) c.q_values.push_back(to_double(section, key, item));
        } else throw ConfigError("config: unknown key " + where(section, key));
    } else if (section == "interp") {
        if (key == "function") c.interp_function = v;
        else if (key == "n") c.interp_n = integer();
        else if (key == "levels") c.interp_levels = integer();
        else if (key.rfind("function_", 0) == 0) c.interp_params[key.substr(9)] = num();
        else throw ConfigError("config: unknown key " + where(section, key));
    } else if (section == "output") {
        if (key == "directory") c.directory = v;
        else if (key == "formats") c.formats = split_list(v);
        else throw ConfigError("config: unknown key " + where(section, key));
    } else {
        throw ConfigError("config: unknown section [" + section + "]");
    }
}

void apply_override(RunConfig& c, const std::string& text) {
    const auto eq = text.find('=');
    const auto dot = text.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("config: override '" + text + "' is not of the form section.key=value");
    set_key(c, trim(text.substr(0, dot)), trim(text.substr(dot + 1, eq - dot - 1)),
            text.substr(eq + 1));
}

RunConfig from_tree(const boost::property_tree::ptree& tree,
                    const std::vector<std::string>& overrides) {
    RunConfig c;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("config: key '" + section + "' outside of a section");
        for (const auto& [key, value] : body) set_key(c, section, key, value.data());
    }
    for (const auto& o : overrides) apply_override(c, o);
    c.validate();
    return c;
}

} // namespace

void RunConfig::validate() const {
    try {
        params.validate();
        solver.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!(c0 >= 0.0)) throw ConfigError("config: requires problem.c0 >= 0");
    if (n < 1) throw ConfigError("config: requires mesh.n >= 1");
    if (levels < 3) throw ConfigError("config: requires mesh.levels >= 3");
    if (ref_extra < 1) throw ConfigError("config: requires mesh.ref_extra >= 1");
    if (q_values.empty()) throw ConfigError("config: eoc.q_values is empty");
    for (double q : q_values)
        if (!(q > 0.0 && q < 1.0)) throw ConfigError("config: eoc.q_values requires 0 < q < 1");
    if (interp_n < 1) throw ConfigError("config: requires interp.n >= 1");
    if (interp_levels < 3) throw ConfigError("config: requires interp.levels >= 3");
    for (const auto& fmt : formats)
        if (fmt != "csv" && fmt != "vtk")
            throw ConfigError("config: output.formats accepts csv and vtk, got '" + fmt + "'");
    if (directory.empty()) throw ConfigError("config: output.directory is empty");
    try {
        make_preset(yd, yd_params);
        make_preset(f, f_params);
        make_preset(interp_function, interp_params);
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ProblemSpec RunConfig::problem_spec() const {
    ProblemSpec spec;
    spec.params = params;
    spec.yd = make_preset(yd, yd_params);
    spec.f = make_preset(f, f_params);
    if (c0 != 0.0) {
        const double c = c0;
        spec.coeffs.c0 = [c](Point2) { return c; };
    }
    return spec;
}

LadderConfig RunConfig::ladder(int jobs) const {
    LadderConfig l;
    l.base_n = n;
    l.levels = levels;
    l.ref_extra = ref_extra;
    l.spec = problem_spec();
    l.options = solver;
    l.q_values = q_values;
    l.jobs = jobs;
    return l;
}

Function2D RunConfig::interp_target() const { return make_preset(interp_function, interp_params); }

bool RunConfig::wants(const std::string& format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

std::filesystem::path RunConfig::output_directory() const {
    if (directory.is_absolute()) return directory;
    if (const char* root = std::getenv("LQOCP_OUTPUT_ROOT"); root && *root)
        return std::filesystem::path(root) / directory;
    return directory;
}

RunConfig parse_config(std::istream& is, const std::vector<std::string>& overrides) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return from_tree(tree, overrides);
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    if (path.empty()) return from_tree({}, overrides);
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot read " + path.string());
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config: " + path.string() + ": " + e.message() + " (line " +
                          std::to_string(e.line()) + ")");
    }
    return from_tree(tree, overrides);
}

void write_manifest(std::ostream& os, const RunConfig& c) {
    auto list = [](const auto& items, auto&& fmt) {
        std::string out;
        for (const auto& it : items) out += (out.empty() ? "" : ", ") + fmt(it);
        return out;
    };
    os << "[problem]\n"
       << "alpha = " << io::fmt17(c.params.alpha) << '\n'
       << "beta = " << io::fmt17(c.params.beta) << '\n'
       << "q = " << io::fmt17(c.params.q) << '\n'
       << "gamma = " << io::fmt17(c.params.gamma) << '\n'
       << "u_a = " << io::fmt17(c.params.u_a) << '\n'
       << "u_b = " << io::fmt17(c.params.u_b) << '\n'
       << "c0 = " << io::fmt17(c.c0) << '\n'
       << "y_d = " << c.yd << '\n';
    for (const auto& [k, v] : c.yd_params) os << "y_d_" << k << " = " << io::fmt17(v) << '\n';
    os << "f = " << c.f << '\n';
    for (const auto& [k, v] : c.f_params) os << "f_" << k << " = " << io::fmt17(v) << '\n';
    os << "\n[mesh]\n"
       << "n = " << c.n << '\n'
       << "levels = " << c.levels << '\n'
       << "ref_extra = " << c.ref_extra << '\n'
       << "\n[solver]\n"
       << "tol_outer = " << io::fmt17(c.solver.tol_outer) << '\n'
       << "tol_inner = " << io::fmt17(c.solver.tol_inner) << '\n'
       << "max_outer = " << c.solver.max_outer << '\n'
       << "max_inner = " << c.solver.max_inner << '\n'
       << "damping = " << io::fmt17(c.solver.damping) << '\n'
       << "inner_method = "
       << (c.solver.inner_method == InnerMethod::picard ? "picard" : "semi-smooth-newton") << '\n'
       << "linear_solver = "
       << (c.solver.linear_solver == fem::LinearSolverKind::pcg ? "pcg" : "direct") << '\n'
       << "polish = " << (c.solver.pointwise_polish ? "true" : "false") << '\n';
    if (!c.init_file.empty()) os << "init = " << c.init_file.string() << '\n';
    os << "\n[eoc]\n"
       << "q_values = " << list(c.q_values, [](double q) { return io::fmt17(q); }) << '\n'
       << "\n[interp]\n"
       << "function = " << c.interp_function << '\n';
    for (const auto& [k, v] : c.interp_params) os << "function_" << k << " = " << io::fmt17(v) << '\n';
    os << "n = " << c.interp_n << '\n'
       << "levels = " << c.interp_levels << '\n'
       << "\n[output]\n"
       << "directory = " << c.directory.string() << '\n'
       << "formats = " << list(c.formats, [](const std::string& s) { return s; }) << '\n';
}

} // namespace lqocp
