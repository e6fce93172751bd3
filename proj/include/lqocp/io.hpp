#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lqocp/fem.hpp"
#include "lqocp/mesh.hpp"

namespace lqocp::io {

/// Round-trip decimal form, 17 significant digits; "nan" for missing cells.
std::string fmt17(double v);
/// Fixed 4-decimal form for human-readable tables.
std::string fmt4(double v);

/// Legacy ASCII VTK unstructured grid. Point and cell arrays are optional.
void write_vtk(std::ostream& os, const TriMesh& mesh,
               const std::vector<std::pair<std::string, const std::vector<double>*>>& point_data = {},
               const std::vector<std::pair<std::string, const std::vector<double>*>>& cell_data = {});
void write_vtk_file(const std::filesystem::path& path, const TriMesh& mesh,
                    const std::vector<std::pair<std::string, const std::vector<double>*>>& point_data = {},
                    const std::vector<std::pair<std::string, const std::vector<double>*>>& cell_data = {});

/// One value per element, header "element,u"; used for --init.
std::vector<double> read_p0_csv(const std::filesystem::path& path, std::size_t expected);
void write_p0_csv(const std::filesystem::path& path, const fem::P0Field& u);

} // namespace lqocp::io
