#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "eplab/background.hpp"
#include "eplab/errors.hpp"
#include "eplab/grid.hpp"
#include "eplab/potential_state.hpp"
#include "eplab/stream_state.hpp"

namespace eplab {

enum class Formulation { potential, stream };

inline const char* to_string(Formulation f) {
    return f == Formulation::potential ? "potential" : "stream";
}

// One boundary datum on a cross-section, with enough derivatives for the
// compatibility checks and the exact antiderivative for stream traces.
struct BoundaryFunction {
    std::function<double(double)> value = [](double) { return 0.0; };
    std::function<double(double)> deriv = [](double) { return 0.0; };
    std::function<double(double)> deriv2 = [](double) { return 0.0; };
    std::function<double(double)> antideriv = [](double) { return 0.0; };

    static BoundaryFunction zero() { return {}; }
};

// Perturbation data of the problem: mass-flux perturbation g0 and potential
// perturbation h0 on Gamma_0, field perturbation vL on Gamma_L.
struct BoundaryData {
    BoundaryFunction g0, h0, vL;

    // Electric case: h0'(x2) = 0 at x2 = 0, ell. Gravitational case: g0, h0,
    // vL and their first two derivatives vanish at both endpoints.
    void validate(FieldCase c, double ell) const {
        const double tol = 1e-10;
        auto near_zero = [&](double v, const std::string& what) {
            if (std::abs(v) > tol)
                throw ConfigError("boundary compatibility violated: " + what + " = " +
                                  std::to_string(v) + " (must vanish)");
        };
        if (c == FieldCase::electric) {
            near_zero(h0.deriv(0.0), "h0'(0)");
            near_zero(h0.deriv(ell), "h0'(ell)");
        } else {
            struct Named { const BoundaryFunction* f; const char* n; };
            for (const auto& [f, n] : {Named{&g0, "g0"}, Named{&h0, "h0"}, Named{&vL, "vL"}}) {
                for (double x : {0.0, ell}) {
                    const std::string at = std::string(n) + "(" + std::to_string(x) + ")";
                    near_zero(f->value(x), at);
                    near_zero(f->deriv(x), "d/dx2 " + at);
                    near_zero(f->deriv2(x), "d2/dx2^2 " + at);
                }
            }
        }
    }
};

// Background profile resampled onto the x1 nodes of a 2D grid.
struct GridBackground {
    double J = 0.0;
    double K0 = 0.0;
    double k0 = 0.0;
    double gamma = 0.0;
    std::vector<double> rho, u, Phi, phi; // size nx+1

    static GridBackground from_profile(const BackgroundProfile& bg, const NozzleGrid& grid) {
        if (std::abs(bg.L - grid.L) > 1e-14 * std::max(1.0, grid.L))
            throw ConfigError("background length does not match the grid");
        const int n = bg.nsteps();
        if (n % grid.nx != 0)
            throw ConfigError("background nsteps must be a multiple of nx so nodes coincide");
        const int stride = n / grid.nx;
        GridBackground g;
        g.J = bg.J;
        g.K0 = bg.K0;
        g.k0 = bg.k0_stream;
        g.gamma = bg.gamma;
        for (int i = 0; i <= grid.nx; ++i) {
            const std::size_t k = std::size_t(i) * stride;
            g.rho.push_back(bg.rho_bar[k]);
            g.u.push_back(bg.u_bar[k]);
            g.Phi.push_back(bg.Phi_bar[k]);
            g.phi.push_back(bg.phi_bar[k]);
        }
        return g;
    }

    Vec2 q_pivot(Formulation f, int i) const {
        return f == Formulation::potential ? Vec2{u[std::size_t(i)], 0.0} : Vec2{0.0, J};
    }
};

// x1-dependent coefficients of the linearized (background-frozen) operator:
//   L1(U,V) = div(A_diag grad U + V cz),
//   L2(U,V) = lap * Lap(V) - bz V - bq . grad U.
struct OperatorCoefficients {
    Formulation form = Formulation::potential;
    NozzleGrid grid;
    std::vector<double> a11, a22, cz1, cz2, bz, bq1, bq2, lap;

    static OperatorCoefficients build(Formulation form, const PressureLaw& law,
                                      const GridBackground& bg, const DopingProfile& doping,
                                      const NozzleGrid& grid) {
        OperatorCoefficients c;
        c.form = form;
        c.grid = grid;
        const int n = grid.nx + 1;
        c.a11.resize(n); c.a22.resize(n); c.cz1.resize(n); c.cz2.resize(n);
        c.bz.resize(n); c.bq1.resize(n); c.bq2.resize(n); c.lap.resize(n);
        for (int i = 0; i < n; ++i) {
            const double rho = bg.rho[i], u = bg.u[i];
            const double w = doping.w(grid.x1(i));
            if (form == Formulation::potential) {
                const double dp = law.dp(rho);
                c.a11[i] = rho * (1.0 - u * u / dp);
                c.a22[i] = rho;
                c.cz1[i] = rho * u / dp;
                c.cz2[i] = 0.0;
                c.bz[i] = rho / dp;
                c.bq1[i] = -rho * u / dp;
                c.bq2[i] = 0.0;
                c.lap[i] = 1.0 / w;
            } else {
                const double g = bg.gamma;
                stream::require_gamma_above_one(g, "stream operator coefficients");
                const double kappa = g * std::pow(rho, g + 1.0) - bg.J * bg.J;
                if (!(kappa > 0.0))
                    throw SonicDegeneracy("background is not strictly subsonic for the stream "
                                          "operator at x1 index " + std::to_string(i));
                c.a11[i] = 1.0 / rho;
                c.a22[i] = (1.0 + bg.J * bg.J / kappa) / rho;
                c.cz1[i] = 0.0;
                c.cz2[i] = -bg.J * rho / kappa;
                c.bz[i] = -rho * rho * rho / kappa;
                c.bq1[i] = 0.0;
                c.bq2[i] = bg.J * rho / kappa;
                c.lap[i] = -1.0 / w;
            }
            if (!(c.a11[i] > 0.0) || !(c.a22[i] > 0.0) || !(c.lap[i] > 0.0))
                throw SolverError("operator lost ellipticity at x1 index " + std::to_string(i));
        }
        return c;
    }

    // Extremes of the background coefficient matrix, i.e. the ellipticity
    // constants lambda_0 and Lambda_0.
    std::pair<double, double> ellipticity_bounds() const {
        double lo = a11[0], hi = a11[0];
        for (std::size_t i = 0; i < a11.size(); ++i) {
            lo = std::min({lo, a11[i], a22[i]});
            hi = std::max({hi, a11[i], a22[i]});
        }
        return {lo, hi};
    }
};

// Nodal gradient of a perturbation field. Second-order one-sided stencils at
// x1 ends; walls use reflection (zero normal derivative) in the potential
// formulation and one-sided stencils in the stream formulation.
inline double ddx_node(const Field2D& U, const NozzleGrid& g, int i, int j) {
    if (i == 0) return (-3.0 * U(0, j) + 4.0 * U(1, j) - U(2, j)) / (2.0 * g.hx);
    if (i == g.nx)
        return (3.0 * U(g.nx, j) - 4.0 * U(g.nx - 1, j) + U(g.nx - 2, j)) / (2.0 * g.hx);
    return (U(i + 1, j) - U(i - 1, j)) / (2.0 * g.hx);
}

inline double ddy_node(const Field2D& U, const NozzleGrid& g, int i, int j, Formulation form) {
    if (j == 0) {
        if (form == Formulation::potential) return 0.0; // wall: grad U . n = 0
        return (-3.0 * U(i, 0) + 4.0 * U(i, 1) - U(i, 2)) / (2.0 * g.hy);
    }
    if (j == g.ny) {
        if (form == Formulation::potential) return 0.0;
        return (3.0 * U(i, g.ny) - 4.0 * U(i, g.ny - 1) + U(i, g.ny - 2)) / (2.0 * g.hy);
    }
    return (U(i, j + 1) - U(i, j - 1)) / (2.0 * g.hy);
}

} // namespace eplab
