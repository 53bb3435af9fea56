#pragma once

#include <cmath>
#include <vector>

#include "eplab/problem.hpp"
#include "eplab/rng.hpp"

namespace eplab {

// Trial pair for the coercivity probe; essential boundary conditions are
// U = 0 on Gamma_L and V = 0 on Gamma_0.
struct TrialPair {
    Field2D U, V;
};

namespace detail {

// One-sided/centered nodal derivatives without any wall reflection; trial
// fields need not satisfy natural boundary conditions.
inline double ddx_raw(const Field2D& F, const NozzleGrid& g, int i, int j) {
    if (i == 0) return (-3.0 * F(0, j) + 4.0 * F(1, j) - F(2, j)) / (2.0 * g.hx);
    if (i == g.nx)
        return (3.0 * F(g.nx, j) - 4.0 * F(g.nx - 1, j) + F(g.nx - 2, j)) / (2.0 * g.hx);
    return (F(i + 1, j) - F(i - 1, j)) / (2.0 * g.hx);
}

inline double ddy_raw(const Field2D& F, const NozzleGrid& g, int i, int j) {
    if (j == 0) return (-3.0 * F(i, 0) + 4.0 * F(i, 1) - F(i, 2)) / (2.0 * g.hy);
    if (j == g.ny)
        return (3.0 * F(i, g.ny) - 4.0 * F(i, g.ny - 1) + F(i, g.ny - 2)) / (2.0 * g.hy);
    return (F(i, j + 1) - F(i, j - 1)) / (2.0 * g.hy);
}

inline double trapezoid_weight(const NozzleGrid& g, int i, int j) {
    double w = g.hx * g.hy;
    if (i == 0 || i == g.nx) w *= 0.5;
    if (j == 0 || j == g.ny) w *= 0.5;
    return w;
}

} // namespace detail

inline std::vector<TrialPair> make_random_trials(const NozzleGrid& g, int n, Rng& rng) {
    std::vector<TrialPair> out;
    out.reserve(std::size_t(n));
    for (int s = 0; s < n; ++s) {
        TrialPair t{Field2D(g), Field2D(g)};
        double cu[5], cv[5];
        for (auto& c : cu) c = rng.uniform(-1.0, 1.0);
        for (auto& c : cv) c = rng.uniform(-1.0, 1.0);
        for (int i = 0; i <= g.nx; ++i) {
            const double x = g.x1(i);
            const double mu = (g.L - x) / g.L; // U = 0 on Gamma_L
            const double mv = x / g.L;         // V = 0 on Gamma_0
            for (int j = 0; j <= g.ny; ++j) {
                const double y = g.x2(j);
                const double c1 = std::cos(M_PI * y / g.ell);
                const double c2 = std::cos(2.0 * M_PI * y / g.ell);
                t.U(i, j) = mu * (cu[0] + cu[1] * x + c1 * (cu[2] + cu[3] * x) + cu[4] * c2);
                t.V(i, j) = mv * (cv[0] + cv[1] * x + c1 * (cv[2] + cv[3] * x) + cv[4] * c2);
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

struct CoercivityReport {
    std::vector<double> margins; // per trial, Rayleigh-normalized
    double min_margin = 0.0;
    double lambda0 = 0.0;
    double mu0 = 0.0;
};

// Discrete quadrature of B1[(U,V),U] + B2[(U,V),V] against the coercivity
// bound lambda0 ||grad U||^2 + (2 mu0)^{-1} ||grad V||^2. Electric-case weak
// forms; the coupling terms V cz . grad U and V bq . grad U cancel through
// the dA/dz + dB/dq = 0 identity but are evaluated explicitly.
inline CoercivityReport coercivity_probe(const OperatorCoefficients& coefs,
                                         const DopingProfile& doping,
                                         const std::vector<TrialPair>& trials) {
    if (doping.field_case != FieldCase::electric)
        throw ConfigError("coercivity probe is defined for the electric case (min w > 0)");
    if (coefs.form != Formulation::potential)
        throw ConfigError("coercivity probe uses the potential-formulation weak forms");
    const NozzleGrid& g = coefs.grid;
    CoercivityReport rep;
    auto [lambda0, Lambda0] = coefs.ellipticity_bounds();
    (void)Lambda0;
    rep.lambda0 = lambda0;
    rep.mu0 = doping.mu;

    for (const auto& t : trials) {
        double B12 = 0.0, gradU2 = 0.0, gradV2 = 0.0;
        for (int i = 0; i <= g.nx; ++i) {
            const double x = g.x1(i);
            const double w = doping.w(x), wp = doping.wprime(x);
            for (int j = 0; j <= g.ny; ++j) {
                const double wq = detail::trapezoid_weight(g, i, j);
                const double ux = detail::ddx_raw(t.U, g, i, j);
                const double uy = detail::ddy_raw(t.U, g, i, j);
                const double vx = detail::ddx_raw(t.V, g, i, j);
                const double vy = detail::ddy_raw(t.V, g, i, j);
                const double V = t.V(i, j);
                const double b1 = coefs.a11[i] * ux * ux + coefs.a22[i] * uy * uy +
                                  V * (coefs.cz1[i] * ux + coefs.cz2[i] * uy);
                const double b2 = (vx * vx + vy * vy) / w +
                                  (coefs.bz[i] * V + coefs.bq1[i] * ux + coefs.bq2[i] * uy -
                                   wp / (w * w) * vx) *
                                      V;
                B12 += wq * (b1 + b2);
                gradU2 += wq * (ux * ux + uy * uy);
                gradV2 += wq * (vx * vx + vy * vy);
            }
        }
        const double denom = gradU2 + gradV2;
        if (denom <= 0.0) continue; // zero trial excluded
        const double lower = lambda0 * gradU2 + gradV2 / (2.0 * doping.mu);
        rep.margins.push_back((B12 - lower) / denom);
    }
    rep.min_margin = rep.margins.empty()
                         ? std::numeric_limits<double>::quiet_NaN()
                         : *std::min_element(rep.margins.begin(), rep.margins.end());
    return rep;
}

} // namespace eplab
