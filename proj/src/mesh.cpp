#include "lqocp/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

namespace lqocp {

namespace {

std::atomic<std::uint64_t> next_lineage{1};

double signed_area(Point2 a, Point2 b, Point2 c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool on_boundary(const Rectangle& d, Point2 p) {
    const double scale = std::max({std::abs(d.x0), std::abs(d.x1), std::abs(d.y0),
                                   std::abs(d.y1), 1.0});
    const double tol = 10.0 * std::numeric_limits<double>::epsilon() * scale;
    return std::abs(p.x - d.x0) <= tol || std::abs(p.x - d.x1) <= tol ||
           std::abs(p.y - d.y0) <= tol || std::abs(p.y - d.y1) <= tol;
}

} // namespace

TriMesh::TriMesh(Rectangle domain, std::vector<Point2> vertices, std::vector<Triangle> triangles,
                 int level, MeshPtr parent, std::vector<int> parent_element,
                 std::uint64_t lineage)
    : domain_(domain), vertices_(std::move(vertices)), triangles_(std::move(triangles)),
      level_(level), parent_(std::move(parent)), parent_element_(std::move(parent_element)),
      lineage_(lineage) {
    if (!parent_element_.empty() && parent_element_.size() != triangles_.size())
        throw InvalidInput("TriMesh: parent map size does not match triangle count");
    area_.resize(triangles_.size());
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        for (int v : tri)
            if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size())
                throw InvalidInput("TriMesh: vertex index out of range in triangle " +
                                   std::to_string(t));
        const double a = signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
        if (!(a > 0.0))
            throw InvalidInput("TriMesh: triangle " + std::to_string(t) +
                               " is degenerate or clockwise");
        area_[t] = a;
        mesh_size_ = std::max(mesh_size_, diameter(t));
    }
    boundary_.resize(vertices_.size());
    for (std::size_t v = 0; v < vertices_.size(); ++v) {
        boundary_[v] = on_boundary(domain_, vertices_[v]) ? 1 : 0;
        if (!boundary_[v]) ++num_interior_;
    }
}

std::array<Point2, 3> TriMesh::corners(std::size_t t) const {
    const auto& tri = triangles_[t];
    return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

Point2 TriMesh::barycenter(std::size_t t) const {
    const auto c = corners(t);
    return {(c[0].x + c[1].x + c[2].x) / 3.0, (c[0].y + c[1].y + c[2].y) / 3.0};
}

double TriMesh::diameter(std::size_t t) const {
    const auto c = corners(t);
    return std::max({dist(c[0], c[1]), dist(c[1], c[2]), dist(c[2], c[0])});
}

double TriMesh::inradius(std::size_t t) const {
    const auto c = corners(t);
    const double perimeter = dist(c[0], c[1]) + dist(c[1], c[2]) + dist(c[2], c[0]);
    return 2.0 * area_[t] / perimeter;
}

double TriMesh::shape_regularity() const {
    double worst = 0.0;
    for (std::size_t t = 0; t < triangles_.size(); ++t)
        worst = std::max(worst, diameter(t) / inradius(t));
    return worst;
}

double TriMesh::total_area() const {
    // Compensated sum: the invariant is checked at the 10 eps level on large meshes.
    double sum = 0.0, carry = 0.0;
    for (double a : area_) {
        const double y = a - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

MeshPtr build_uniform_rectangle(const Rectangle& domain, int nx, int ny) {
    if (nx < 1 || ny < 1) throw InvalidInput("build_uniform_rectangle: cell counts must be >= 1");
    if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0))
        throw InvalidInput("build_uniform_rectangle: empty rectangle");
    const int stride = nx + 1;
    std::vector<Point2> vertices;
    vertices.reserve(static_cast<std::size_t>(stride) * (ny + 1));
    for (int j = 0; j <= ny; ++j) {
        const double y = (j == ny) ? domain.y1
                                   : domain.y0 + (domain.y1 - domain.y0) * j / ny;
        for (int i = 0; i <= nx; ++i) {
            const double x = (i == nx) ? domain.x1
                                       : domain.x0 + (domain.x1 - domain.x0) * i / nx;
            vertices.push_back({x, y});
        }
    }
    std::vector<TriMesh::Triangle> triangles;
    triangles.reserve(2 * static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = j * stride + i;
            const int v10 = v00 + 1;
            const int v01 = v00 + stride;
            const int v11 = v01 + 1;
            triangles.push_back({v00, v10, v11});
            triangles.push_back({v00, v11, v01});
        }
    }
    return std::make_shared<const TriMesh>(domain, std::move(vertices), std::move(triangles), 0,
                                           nullptr, std::vector<int>{}, next_lineage++);
}

MeshPtr build_uniform_square(int n) {
    if (n < 1) throw InvalidInput("build_uniform_square: n must be >= 1");
    return build_uniform_rectangle(Rectangle{}, n, n);
}

MeshPtr refine_uniform(const MeshPtr& mesh) {
    if (!mesh) throw InvalidInput("refine_uniform: null mesh");
    const auto& old_vertices = mesh->vertices();
    const auto& old_triangles = mesh->triangles();
    std::vector<Point2> vertices = old_vertices;
    vertices.reserve(old_vertices.size() + 3 * old_triangles.size() / 2 + 2);

    std::unordered_map<std::uint64_t, int> midpoint_of;
    midpoint_of.reserve(3 * old_triangles.size() / 2 + 2);
    auto midpoint = [&](int a, int b) {
        const auto lo = static_cast<std::uint64_t>(std::min(a, b));
        const auto hi = static_cast<std::uint64_t>(std::max(a, b));
        const std::uint64_t key = (lo << 32) | hi;
        auto [it, inserted] = midpoint_of.try_emplace(key, static_cast<int>(vertices.size()));
        if (inserted) vertices.push_back(0.5 * (old_vertices[a] + old_vertices[b]));
        return it->second;
    };

    std::vector<TriMesh::Triangle> triangles;
    triangles.reserve(4 * old_triangles.size());
    std::vector<int> parent(4 * old_triangles.size());
    for (std::size_t p = 0; p < old_triangles.size(); ++p) {
        const auto [a, b, c] = old_triangles[p];
        const int ab = midpoint(a, b);
        const int bc = midpoint(b, c);
        const int ca = midpoint(c, a);
        triangles.push_back({a, ab, ca});
        triangles.push_back({ab, b, bc});
        triangles.push_back({ca, bc, c});
        triangles.push_back({ab, bc, ca});
        for (int k = 0; k < 4; ++k) parent[4 * p + k] = static_cast<int>(p);
    }

    // Restore the (y, x) lexicographic vertex order.
    std::vector<int> order(vertices.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int l, int r) {
        const Point2 a = vertices[l], b = vertices[r];
        return a.y < b.y || (a.y == b.y && a.x < b.x);
    });
    std::vector<int> new_index(vertices.size());
    std::vector<Point2> sorted(vertices.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        new_index[order[k]] = static_cast<int>(k);
        sorted[k] = vertices[order[k]];
    }
    for (auto& tri : triangles)
        for (int& v : tri) v = new_index[v];

    return std::make_shared<const TriMesh>(mesh->domain(), std::move(sorted), std::move(triangles),
                                           mesh->level() + 1, mesh, std::move(parent),
                                           mesh->lineage());
}

bool is_ancestor(const TriMesh& coarse, const TriMesh& fine) {
    const TriMesh* m = &fine;
    while (m) {
        if (m == &coarse) return true;
        m = m->parent().get();
    }
    return false;
}

std::vector<int> ancestor_map(const TriMesh& fine, const TriMesh& coarse) {
    if (!is_ancestor(coarse, fine))
        throw InvalidInput("ancestor_map: meshes are not in the same refinement lineage");
    std::vector<int> map(fine.num_triangles());
    std::iota(map.begin(), map.end(), 0);
    const TriMesh* m = &fine;
    while (m != &coarse) {
        for (int& t : map) t = m->parent_element(static_cast<std::size_t>(t));
        m = m->parent().get();
    }
    return map;
}

} // namespace lqocp
