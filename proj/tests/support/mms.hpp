#pragma once

// Manufactured-solution errors for the linearized system on analytic
// backgrounds; used by the discretization tests and the acceptance suite.

#include <cmath>

#include "eplab/linear_system.hpp"
#include "support/fixtures.hpp"

namespace mms {

using namespace eplab;

inline double potential_mms_error(int nx, int ny) {
    const double L = 1.0, ell = 1.0;
    NozzleGrid grid(L, ell, nx, ny);
    fixtures::PotentialMms pm;
    auto bg = pm.grid_background(grid);
    auto doping = fixtures::electric_unit(L);
    auto coefs = OperatorCoefficients::build(Formulation::potential, pm.law, bg, doping, grid);
    EllipticOperator op(coefs);

    const double a = M_PI / (2.0 * L), k = M_PI / ell;
    auto Ue = [&](double x, double y) { return std::sin(a * (L - x)) * std::cos(k * y); };
    auto dUdx = [&](double x, double y) { return -a * std::cos(a * (L - x)) * std::cos(k * y); };
    auto dUdy = [&](double x, double y) { return -k * std::sin(a * (L - x)) * std::sin(k * y); };
    auto Ve = [&](double x, double y) { return (0.4 + 0.3 * x + 0.25 * x * x) * std::cos(k * y); };
    auto dVdx = [&](double x, double y) { return (0.3 + 0.5 * x) * std::cos(k * y); };
    auto lapV = [&](double x, double y) { return 0.5 * std::cos(k * y) - k * k * Ve(x, y); };

    LinearProblemData d = LinearProblemData::zeros(grid);
    for (int i = 0; i <= nx; ++i) {
        const double x = grid.x1(i);
        for (int j = 0; j <= ny; ++j) {
            const double y = grid.x2(j);
            d.F1(i, j) = pm.a11(x) * dUdx(x, y) + pm.cz1(x) * Ve(x, y);
            d.F2(i, j) = pm.a22(x) * dUdy(x, y);
            d.f(i, j) = lapV(x, y) - pm.bz(x) * Ve(x, y) - pm.bq1(x) * dUdx(x, y);
        }
    }
    for (int j = 0; j <= ny; ++j) {
        const double y = grid.x2(j);
        d.gW[j] = 0.0; // total flux (A grad U + V cz - F) . e1 vanishes by construction
        d.uDL[j] = Ue(L, y);
        d.hD[j] = Ve(0.0, y);
        d.vN[j] = dVdx(L, y);
    }

    auto [U, V] = op.solve(d);
    double err = 0.0;
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j <= ny; ++j) {
            err = std::max(err, std::abs(U(i, j) - Ue(grid.x1(i), grid.x2(j))));
            err = std::max(err, std::abs(V(i, j) - Ve(grid.x1(i), grid.x2(j))));
        }
    return err;
}

inline double stream_mms_error(int nx, int ny) {
    const double L = 1.0, ell = 1.0;
    NozzleGrid grid(L, ell, nx, ny);
    fixtures::StreamMms sm;
    auto bg = sm.grid_background(grid);
    auto doping = fixtures::gravitational_unit(L);
    auto law = PressureLaw::polytropic(sm.gamma);
    auto coefs = OperatorCoefficients::build(Formulation::stream, law, bg, doping, grid);
    EllipticOperator op(coefs);

    const double aL = M_PI / (2.0 * L), k1 = M_PI / ell, k2 = 2.0 * M_PI / ell;
    auto s1 = [&](double x) { return std::sin(aL * x); };
    auto s1p = [&](double x) { return aL * std::cos(aL * x); };
    auto s2 = [&](double x) { return 0.5 * (1.0 + std::cos(M_PI * x / L)); }; // cos^2(pi x/2L)
    auto s2p = [&](double x) { return -0.5 * M_PI / L * std::sin(M_PI * x / L); };
    auto Ue = [&](double x, double y) {
        return s1(x) * std::sin(k2 * y) + 0.2 * s2(x) * std::sin(k1 * y);
    };
    auto dUdx = [&](double x, double y) {
        return s1p(x) * std::sin(k2 * y) + 0.2 * s2p(x) * std::sin(k1 * y);
    };
    auto dUdy = [&](double x, double y) {
        return k2 * s1(x) * std::cos(k2 * y) + 0.2 * k1 * s2(x) * std::cos(k1 * y);
    };
    auto Ve = [&](double x, double y) { return (0.5 + 0.4 * x) * std::cos(k1 * y); };
    auto dVdx = [&](double, double y) { return 0.4 * std::cos(k1 * y); };
    auto lapV = [&](double x, double y) { return -k1 * k1 * Ve(x, y); };

    LinearProblemData d = LinearProblemData::zeros(grid);
    for (int i = 0; i <= nx; ++i) {
        const double x = grid.x1(i);
        for (int j = 0; j <= ny; ++j) {
            const double y = grid.x2(j);
            d.F1(i, j) = sm.a11(x) * dUdx(x, y);
            d.F2(i, j) = sm.a22(x) * dUdy(x, y) + sm.cz2(x) * Ve(x, y);
            d.f(i, j) = lapV(x, y) - sm.bz(x) * Ve(x, y) - sm.bq2(x) * dUdy(x, y);
        }
    }
    for (int j = 0; j <= ny; ++j) {
        const double y = grid.x2(j);
        d.uD0[j] = Ue(0.0, y);
        d.gE[j] = 0.0; // dU/dx(L,.) = 0 and F1 = a11 dU/dx there
        d.hD[j] = Ve(0.0, y);
        d.vN[j] = dVdx(L, y);
    }
    for (int i = 0; i <= nx; ++i) {
        d.uDwall_lo[i] = Ue(grid.x1(i), 0.0);
        d.uDwall_hi[i] = Ue(grid.x1(i), ell);
    }

    auto [U, V] = op.solve(d);
    double err = 0.0;
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j <= ny; ++j) {
            err = std::max(err, std::abs(U(i, j) - Ue(grid.x1(i), grid.x2(j))));
            err = std::max(err, std::abs(V(i, j) - Ve(grid.x1(i), grid.x2(j))));
        }
    return err;
}

} // namespace mms
