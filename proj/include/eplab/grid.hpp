#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "eplab/errors.hpp"

namespace eplab {

// Structured rectangular discretization of the nozzle (0,L) x (0,ell).
// Nodes (i,j) at (i hx, j hy), i = 0..nx, j = 0..ny. Gamma_0 is the face
// x1 = 0, Gamma_L the face x1 = L, Gamma_w the walls x2 = 0 and x2 = ell.
struct NozzleGrid {
    double L = 1.0;
    double ell = 1.0;
    int nx = 4;
    int ny = 4;
    double hx = 0.25;
    double hy = 0.25;

    NozzleGrid() = default;
    NozzleGrid(double L_, double ell_, int nx_, int ny_)
        : L(L_), ell(ell_), nx(nx_), ny(ny_), hx(L_ / nx_), hy(ell_ / ny_) {
        if (!(L > 0.0) || !(ell > 0.0)) throw ConfigError("nozzle dimensions must be positive");
        if (nx < 4 || ny < 4) throw ConfigError("grid requires nx, ny >= 4");
    }

    int nodes_x() const { return nx + 1; }
    int nodes_y() const { return ny + 1; }
    int num_nodes() const { return nodes_x() * nodes_y(); }
    double x1(int i) const { return i * hx; }
    double x2(int j) const { return j * hy; }
};

// Nodal scalar field, row-major by x1 then x2: index = i*(ny+1) + j.
struct Field2D {
    int nx = 0;
    int ny = 0;
    std::vector<double> v;

    Field2D() = default;
    explicit Field2D(const NozzleGrid& g, double fill = 0.0)
        : nx(g.nx), ny(g.ny), v(std::size_t(g.num_nodes()), fill) {}
    Field2D(int nx_, int ny_, double fill = 0.0)
        : nx(nx_), ny(ny_), v(std::size_t((nx_ + 1) * (ny_ + 1)), fill) {}

    double& at(int i, int j) { return v[std::size_t(i) * (ny + 1) + j]; }
    double at(int i, int j) const { return v[std::size_t(i) * (ny + 1) + j]; }
    double& operator()(int i, int j) { return at(i, j); }
    double operator()(int i, int j) const { return at(i, j); }

    double max_abs() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }

    void require_finite(const std::string& name) const {
        for (int i = 0; i <= nx; ++i)
            for (int j = 0; j <= ny; ++j)
                if (!std::isfinite(at(i, j)))
                    throw SolverError("non-finite value in field '" + name + "' at node (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
    }
};

inline double max_abs_diff(const Field2D& a, const Field2D& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.v.size(); ++k) m = std::max(m, std::abs(a.v[k] - b.v[k]));
    return m;
}

} // namespace eplab
