#pragma once

// Shared problem constructions for the solver tests: integrated backgrounds
// resampled to a grid, and analytic backgrounds for manufactured-solution
// studies (where every coefficient must be evaluable in closed form).

#include <cmath>
#include <functional>

#include "eplab/background.hpp"
#include "eplab/problem.hpp"
#include "eplab/solver.hpp"

namespace fixtures {

using namespace eplab;

inline DopingProfile electric_unit(double L) {
    return DopingProfile::make(
        FieldCase::electric, [](double) { return 1.0; }, [](double) { return 0.0; },
        [](double) { return 0.0; }, L);
}

inline DopingProfile gravitational_unit(double L) {
    return DopingProfile::make(
        FieldCase::gravitational, [](double) { return -1.0; }, [](double) { return 0.0; },
        [](double) { return 0.0; }, L);
}

// Integrate the 1D background oversampled by `refine` so that the
// pseudo-Bernoulli anchor at grid nodes holds to roundoff.
inline GridBackground background_for_grid(const PressureLaw& law, const DopingProfile& doping,
                                          double J, double rho0, double E0,
                                          const NozzleGrid& grid, int refine = 64) {
    auto profile = integrate_background(law, doping, J, rho0, E0, grid.L, refine * grid.nx);
    return GridBackground::from_profile(profile, grid);
}

// Analytic linear-density background for the potential formulation:
// rho(x) = ra + rb x with everything else from the closed relations.
struct PotentialMms {
    PressureLaw law = PressureLaw::polytropic(2.0);
    double J = 0.5, ra = 1.0, rb = 0.2;

    double rho(double x) const { return ra + rb * x; }
    double u(double x) const { return J / rho(x); }

    GridBackground grid_background(const NozzleGrid& g) const {
        GridBackground bg;
        bg.J = J;
        bg.gamma = law.gamma();
        bg.K0 = 0.5 * u(0.0) * u(0.0) + law.enthalpy(rho(0.0));
        bg.k0 = bg.K0 + law.gamma() / (law.gamma() - 1.0);
        for (int i = 0; i <= g.nx; ++i) {
            const double x = g.x1(i);
            bg.rho.push_back(rho(x));
            bg.u.push_back(u(x));
            bg.Phi.push_back(0.5 * u(x) * u(x) + law.enthalpy(rho(x)) - bg.K0);
            bg.phi.push_back(J / rb * std::log(rho(x) / ra));
        }
        return bg;
    }

    double a11(double x) const { return rho(x) * (1.0 - u(x) * u(x) / law.dp(rho(x))); }
    double a22(double x) const { return rho(x); }
    double cz1(double x) const { return rho(x) * u(x) / law.dp(rho(x)); }
    double bz(double x) const { return rho(x) / law.dp(rho(x)); }
    double bq1(double x) const { return -rho(x) * u(x) / law.dp(rho(x)); }
};

// Analytic linear-density background for the stream formulation.
struct StreamMms {
    double gamma = 3.0, J = 0.4, ra = 1.0, rb = 0.2;

    double rho(double x) const { return ra + rb * x; }
    double u(double x) const { return J / rho(x); }
    double kappa(double x) const { return gamma * std::pow(rho(x), gamma + 1.0) - J * J; }

    GridBackground grid_background(const NozzleGrid& g) const {
        GridBackground bg;
        bg.J = J;
        bg.gamma = gamma;
        auto bern = [&](double x) {
            return 0.5 * J * J / (rho(x) * rho(x)) +
                   gamma / (gamma - 1.0) * std::pow(rho(x), gamma - 1.0);
        };
        bg.k0 = bern(0.0);
        bg.K0 = bg.k0 - gamma / (gamma - 1.0);
        for (int i = 0; i <= g.nx; ++i) {
            const double x = g.x1(i);
            bg.rho.push_back(rho(x));
            bg.u.push_back(u(x));
            bg.Phi.push_back(bern(x) - bg.k0);
            bg.phi.push_back(0.0);
        }
        return bg;
    }

    double a11(double x) const { return 1.0 / rho(x); }
    double a22(double x) const { return (1.0 + J * J / kappa(x)) / rho(x); }
    double cz2(double x) const { return -J * rho(x) / kappa(x); }
    double bz(double x) const { return -std::pow(rho(x), 3.0) / kappa(x); }
    double bq2(double x) const { return J * rho(x) / kappa(x); }
};

inline BoundaryData zero_boundary() { return {}; }

// cos-mode boundary data compatible with the electric case.
inline BoundaryData electric_boundary(double eps, double ell) {
    BoundaryData b;
    const double k = M_PI / ell;
    b.g0 = {[eps, k](double y) { return eps * 0.5 * std::cos(k * y); },
            [eps, k](double y) { return -eps * 0.5 * k * std::sin(k * y); },
            [eps, k](double y) { return -eps * 0.5 * k * k * std::cos(k * y); },
            [eps, k](double y) { return eps * 0.5 * std::sin(k * y) / k; }};
    b.h0 = {[eps, k](double y) { return eps * std::cos(k * y); },
            [eps, k](double y) { return -eps * k * std::sin(k * y); },
            [eps, k](double y) { return -eps * k * k * std::cos(k * y); },
            [eps, k](double y) { return eps * std::sin(k * y) / k; }};
    b.vL = {[eps, k](double y) { return eps * 0.3 * std::cos(k * y); },
            [eps, k](double y) { return -eps * 0.3 * k * std::sin(k * y); },
            [eps, k](double y) { return -eps * 0.3 * k * k * std::cos(k * y); },
            [eps, k](double y) { return eps * 0.3 * std::sin(k * y) / k; }};
    return b;
}

// sin^3-mode boundary data: value and two derivatives vanish at the
// endpoints, as the gravitational case requires.
inline BoundaryFunction sin3_mode(double amp, double ell, int mode = 1) {
    const double k = mode * M_PI / ell;
    return {[amp, k](double y) { const double s = std::sin(k * y); return amp * s * s * s; },
            [amp, k](double y) {
                const double s = std::sin(k * y), c = std::cos(k * y);
                return amp * 3.0 * k * s * s * c;
            },
            [amp, k](double y) {
                const double s = std::sin(k * y), c = std::cos(k * y);
                return amp * 3.0 * k * k * s * (2.0 * c * c - s * s);
            },
            [amp, k](double y) {
                const double c = std::cos(k * y);
                return amp * ((1.0 - c) / k - (1.0 - c * c * c) / (3.0 * k));
            }};
}

inline BoundaryData gravitational_boundary(double eps, double ell) {
    BoundaryData b;
    b.g0 = sin3_mode(0.5 * eps, ell);
    b.h0 = sin3_mode(eps, ell);
    b.vL = sin3_mode(0.3 * eps, ell, 2);
    return b;
}

} // namespace fixtures
