#include "lqocp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lqocp::io {

std::string fmt17(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt4(double v) {
    if (!std::isfinite(v)) return "-";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void write_vtk(std::ostream& os, const TriMesh& mesh,
               const std::vector<std::pair<std::string, const std::vector<double>*>>& point_data,
               const std::vector<std::pair<std::string, const std::vector<double>*>>& cell_data) {
    os << "# vtk DataFile Version 3.0\nlqocp\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.num_vertices() << " double\n";
    for (const auto& p : mesh.vertices()) os << fmt17(p.x) << ' ' << fmt17(p.y) << " 0\n";
    os << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
    for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "CELL_TYPES " << mesh.num_triangles() << '\n';
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) os << "5\n";
    auto block = [&](const char* kind, std::size_t n, const auto& arrays) {
        if (arrays.empty()) return;
        os << kind << ' ' << n << '\n';
        for (const auto& [name, values] : arrays) {
            if (values->size() != n) throw InvalidInput("write_vtk: array '" + name + "' has wrong size");
            os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : *values) os << fmt17(v) << '\n';
        }
    };
    block("POINT_DATA", mesh.num_vertices(), point_data);
    block("CELL_DATA", mesh.num_triangles(), cell_data);
}

void write_vtk_file(const std::filesystem::path& path, const TriMesh& mesh,
                    const std::vector<std::pair<std::string, const std::vector<double>*>>& point_data,
                    const std::vector<std::pair<std::string, const std::vector<double>*>>& cell_data) {
    std::ofstream os(path);
    if (!os) throw InvalidInput("cannot write " + path.string());
    write_vtk(os, mesh, point_data, cell_data);
}

std::vector<double> read_p0_csv(const std::filesystem::path& path, std::size_t expected) {
    std::ifstream is(path);
    if (!is) throw InvalidInput("cannot read control file " + path.string());
    std::vector<double> values(expected, 0.0);
    std::vector<char> seen(expected, 0);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (lineno == 1 && line.find_first_of("0123456789") != 0) continue; // header
        std::istringstream row(line);
        std::string id_text, value_text;
        if (!std::getline(row, id_text, ',') || !std::getline(row, value_text, ','))
            throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": expected element,u");
        std::size_t id = 0;
        double v = 0.0;
        try {
            id = std::stoul(id_text);
            v = std::stod(value_text);
        } catch (const std::exception&) {
            throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": malformed number");
        }
        if (id >= expected || !std::isfinite(v))
            throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": bad element id or value");
        values[id] = v;
        seen[id] = 1;
    }
    for (std::size_t t = 0; t < expected; ++t)
        if (!seen[t]) throw InvalidInput(path.string() + ": missing element " + std::to_string(t));
    return values;
}

void write_p0_csv(const std::filesystem::path& path, const fem::P0Field& u) {
    std::ofstream os(path);
    if (!os) throw InvalidInput("cannot write " + path.string());
    os << "element,u\n";
    for (std::size_t t = 0; t < u.values.size(); ++t) os << t << ',' << fmt17(u.values[t]) << '\n';
}

} // namespace lqocp::io
