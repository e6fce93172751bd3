#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lqocp/common.hpp"

namespace lqocp {

struct Rectangle {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    [[nodiscard]] double area() const { return (x1 - x0) * (y1 - y0); }
};

class TriMesh;
using MeshPtr = std::shared_ptr<const TriMesh>;

/// Conforming triangulation of an axis-aligned rectangle.
///
/// Immutable once built. Vertices are ordered lexicographically by (y, x),
/// triangles are counter-clockwise. A refined mesh keeps a handle to the
/// mesh it was refined from together with the child -> parent element map,
/// which is what inter-level comparisons walk.
class TriMesh {
public:
    using Triangle = std::array<int, 3>;

    TriMesh(Rectangle domain, std::vector<Point2> vertices, std::vector<Triangle> triangles,
            int level, MeshPtr parent, std::vector<int> parent_element, std::uint64_t lineage);

    [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
    [[nodiscard]] std::size_t num_triangles() const { return triangles_.size(); }
    [[nodiscard]] const std::vector<Point2>& vertices() const { return vertices_; }
    [[nodiscard]] const std::vector<Triangle>& triangles() const { return triangles_; }
    [[nodiscard]] Point2 vertex(std::size_t i) const { return vertices_[i]; }
    [[nodiscard]] const Triangle& triangle(std::size_t t) const { return triangles_[t]; }
    [[nodiscard]] std::array<Point2, 3> corners(std::size_t t) const;

    [[nodiscard]] bool is_boundary(std::size_t v) const { return boundary_[v] != 0; }
    [[nodiscard]] std::span<const std::uint8_t> boundary_flags() const { return boundary_; }
    [[nodiscard]] std::size_t num_interior_vertices() const { return num_interior_; }

    [[nodiscard]] double area(std::size_t t) const { return area_[t]; }
    [[nodiscard]] std::span<const double> areas() const { return area_; }
    [[nodiscard]] Point2 barycenter(std::size_t t) const;
    [[nodiscard]] double diameter(std::size_t t) const;
    [[nodiscard]] double inradius(std::size_t t) const;

    [[nodiscard]] const Rectangle& domain() const { return domain_; }
    [[nodiscard]] int level() const { return level_; }
    [[nodiscard]] std::uint64_t lineage() const { return lineage_; }
    [[nodiscard]] const MeshPtr& parent() const { return parent_; }
    /// Element of parent() containing child element t; -1 for root meshes.
    [[nodiscard]] int parent_element(std::size_t t) const {
        return parent_element_.empty() ? -1 : parent_element_[t];
    }

    /// h = max over elements of the element diameter.
    [[nodiscard]] double mesh_size() const { return mesh_size_; }
    /// max over elements of diameter / inradius.
    [[nodiscard]] double shape_regularity() const;
    [[nodiscard]] double total_area() const;

private:
    Rectangle domain_;
    std::vector<Point2> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<std::uint8_t> boundary_;
    std::vector<double> area_;
    std::size_t num_interior_ = 0;
    double mesh_size_ = 0.0;
    int level_ = 0;
    MeshPtr parent_;
    std::vector<int> parent_element_;
    std::uint64_t lineage_ = 0;
};

/// Uniform nx x ny grid of the rectangle, each cell split by its
/// south-west/north-east diagonal into two right triangles.
MeshPtr build_uniform_rectangle(const Rectangle& domain, int nx, int ny);

/// (n+1)^2 vertices and 2n^2 triangles on the unit square, h = sqrt(2)/n.
MeshPtr build_uniform_square(int n);

/// Red refinement: every triangle is split into four congruent children
/// through its edge midpoints. Children of parent p are 4p..4p+3.
MeshPtr refine_uniform(const MeshPtr& mesh);

inline double mesh_size(const TriMesh& mesh) { return mesh.mesh_size(); }

/// For each element of `fine`, the index of its ancestor element in `coarse`.
/// Throws InvalidInput unless `coarse` is `fine` or one of its ancestors.
std::vector<int> ancestor_map(const TriMesh& fine, const TriMesh& coarse);

/// True iff `coarse` is `fine` itself or appears in its refinement chain.
bool is_ancestor(const TriMesh& coarse, const TriMesh& fine);

} // namespace lqocp
