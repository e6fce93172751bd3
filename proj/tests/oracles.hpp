#pragma once

// Independent reference computations for the test suites. Nothing here
// calls into the library's numerical kernels.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

/// In-place Cholesky A = L L^T; returns L.
inline Dense cholesky(Dense a) {
    const std::size_t n = a.size();
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j][j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
        a[j][j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
            a[i][j] = s / a[j][j];
        }
        for (std::size_t k = j + 1; k < n; ++k) a[j][k] = 0.0;
    }
    return a;
}

inline std::vector<double> cholesky_solve(const Dense& l, std::vector<double> b) {
    const std::size_t n = l.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) b[i] -= l[i][k] * b[k];
        b[i] /= l[i][i];
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) b[i] -= l[k][i] * b[k];
        b[i] /= l[i][i];
    }
    return b;
}

inline std::vector<double> matvec(const Dense& a, const std::vector<double>& x) {
    std::vector<double> y(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
    return y;
}

/// Grid minimizer of f on [a, b] with the given step; first hit wins ties.
inline double grid_argmin(const std::function<double(double)>& f, double a, double b, double step) {
    const long n = static_cast<long>(std::floor((b - a) / step));
    double best = a, best_value = f(a);
    for (long k = 1; k <= n + 1; ++k) {
        const double x = std::min(b, a + k * step);
        const double v = f(x);
        if (v < best_value) {
            best = x;
            best_value = v;
        }
    }
    return best;
}

/// Bisection for an increasing g on [a, b] with g(a) < 0 < g(b).
inline double bisect(const std::function<double(double)>& g, double a, double b) {
    for (int k = 0; k < 200; ++k) {
        const double m = 0.5 * (a + b);
        if (g(m) > 0.0) b = m; else a = m;
    }
    return 0.5 * (a + b);
}

/// Value at (x, y) of the solution of -Lap w = 1 on the unit square with
/// zero boundary values, by its double sine series over odd modes.
inline double torsion_series(double x, double y, int modes = 801) {
    const double pi = std::numbers::pi;
    long double sum = 0.0L;
    for (int m = 1; m <= modes; m += 2)
        for (int n = 1; n <= modes; n += 2)
            sum += 16.0L / (std::pow(static_cast<long double>(pi), 4) * m * n *
                            (static_cast<long double>(m) * m + static_cast<long double>(n) * n)) *
                   std::sin(m * pi * x) * std::sin(n * pi * y);
    return static_cast<double>(sum);
}

/// Uniform criss-cross grid of the unit square (same combinatorics as the
/// production mesh but built independently): vertex (i, j) has id j (n+1) + i.
struct Grid {
    int n;
    std::vector<std::array<int, 3>> tris;
    explicit Grid(int n_) : n(n_) {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int v00 = j * (n + 1) + i, v10 = v00 + 1, v01 = v00 + n + 1, v11 = v01 + 1;
                tris.push_back({v00, v10, v11});
                tris.push_back({v00, v11, v01});
            }
    }
    [[nodiscard]] int nv() const { return (n + 1) * (n + 1); }
    [[nodiscard]] bool boundary(int v) const {
        const int i = v % (n + 1), j = v / (n + 1);
        return i == 0 || j == 0 || i == n || j == n;
    }
    [[nodiscard]] double area() const { return 0.5 / (static_cast<double>(n) * n); }
};

/// Interior-interior 5-point Laplacian (which the P1 criss-cross stiffness
/// reproduces), P1 mass matrix restricted to interior vertices, and the P0
/// load map C[i][T] = |T|/3.
struct DenseProblem {
    Grid grid;
    std::vector<int> dof_of;  // -1 on boundary
    int ndof = 0;
    Dense k, m, c;            // ndof x ndof, ndof x ndof, ndof x nt

    explicit DenseProblem(int n) : grid(n) {
        dof_of.assign(static_cast<std::size_t>(grid.nv()), -1);
        for (int v = 0; v < grid.nv(); ++v)
            if (!grid.boundary(v)) dof_of[v] = ndof++;
        const std::size_t nd = static_cast<std::size_t>(ndof);
        k = zeros(nd, nd);
        m = zeros(nd, nd);
        c = zeros(nd, grid.tris.size());
        for (int v = 0; v < grid.nv(); ++v) {
            const int i = dof_of[v];
            if (i < 0) continue;
            k[i][i] = 4.0;
            const int col = v % (n + 1);
            for (int w : {v - 1, v + 1, v - (n + 1), v + (n + 1)}) {
                if (w < 0 || w >= grid.nv()) continue;
                if ((w == v - 1 && col == 0) || (w == v + 1 && col == n)) continue;
                if (dof_of[w] >= 0) k[i][dof_of[w]] = -1.0;
            }
        }
        const double a = grid.area();
        for (std::size_t t = 0; t < grid.tris.size(); ++t)
            for (int r = 0; r < 3; ++r) {
                const int i = dof_of[grid.tris[t][r]];
                if (i < 0) continue;
                c[i][t] += a / 3.0;
                for (int s = 0; s < 3; ++s) {
                    const int j = dof_of[grid.tris[t][s]];
                    if (j >= 0) m[i][j] += a / 12.0 * (r == s ? 2.0 : 1.0);
                }
            }
    }
};

} // namespace oracle
