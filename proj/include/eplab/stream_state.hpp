#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "eplab/errors.hpp"
#include "eplab/potential_state.hpp" // Vec2 / Mat2 helpers

namespace eplab {

// Stream-formulation state: z is the potential value, q = grad(psi) the
// rotated momentum flux, k0 the stream pseudo-Bernoulli constant. Requires
// a polytropic law with gamma > 1; the Bernoulli function is
//   B(rho,q) = |q|^2/(2 rho^2) + gamma rho^{gamma-1}/(gamma-1).
struct StreamPoint {
    double z = 0.0;
    Vec2 q{0.0, 0.0};
    double k0 = 0.0;
    double gamma = 3.0;

    StreamPoint() = default;
    StreamPoint(double z_, Vec2 q_, double k0_, double gamma_)
        : z(z_), q(q_), k0(k0_), gamma(gamma_) {
        if (!(gamma >= 1.0))
            throw ConfigError("stream formulation requires gamma >= 1");
    }
};

namespace stream {

inline void require_gamma_above_one(double gamma, const char* what) {
    if (!(gamma > 1.0))
        throw ConfigError(std::string(what) +
                          " is unsupported for gamma = 1 (the Bernoulli function degenerates); "
                          "use the potential formulation for isothermal flow");
}

inline double bernoulli(double rho, const Vec2& q, double gamma) {
    require_gamma_above_one(gamma, "stream Bernoulli evaluation");
    return 0.5 * norm2(q) / (rho * rho) + gamma / (gamma - 1.0) * std::pow(rho, gamma - 1.0);
}

inline double bernoulli_drho(double rho, const Vec2& q, double gamma) {
    return (gamma * std::pow(rho, gamma + 1.0) - norm2(q)) / (rho * rho * rho);
}

// rho_s(q) = (|q|^2/gamma)^{1/(gamma+1)}, the minimizer of B(.,q).
inline double sonic_density(const StreamPoint& pt) {
    return std::pow(norm2(pt.q) / pt.gamma, 1.0 / (pt.gamma + 1.0));
}

// B(rho_s(q), q) = C(gamma) |q|^{2(gamma-1)/(gamma+1)} in closed form.
inline double sonic_bernoulli(const StreamPoint& pt) {
    require_gamma_above_one(pt.gamma, "sonic_bernoulli");
    const double g = pt.gamma;
    const double C = 0.5 * std::pow(1.0 / g, -2.0 / (g + 1.0)) +
                     g / (g - 1.0) * std::pow(1.0 / g, (g - 1.0) / (g + 1.0));
    return C * std::pow(norm2(pt.q), (g - 1.0) / (g + 1.0));
}

// k0 + z - B(rho_s(q), q). (z,q) lies in S_lambda(gamma) iff this >= lambda;
// a subsonic density root exists iff this is positive.
inline double lambda_margin(const StreamPoint& pt) {
    return pt.k0 + pt.z - sonic_bernoulli(pt);
}

struct DensityRoots {
    double rho_sub = 0.0;
    std::optional<double> rho_sup; // absent when q = 0 (vacuum branch)
};

// Both roots of B(rho, q) = k0 + z: bracketed bisection down to width
// 1e-3 rho_s, then Newton guarded against crossing the sonic fold.
inline DensityRoots solve_density_roots(const StreamPoint& pt) {
    require_gamma_above_one(pt.gamma, "solve_density_roots");
    const double g = pt.gamma;
    const double target = pt.k0 + pt.z;
    const double q2 = norm2(pt.q);

    if (q2 == 0.0) {
        if (!(target > 0.0))
            throw NoSubsonicRoot("no subsonic root: k0 + z = " + std::to_string(target) +
                                 " <= 0 at q = 0");
        return {std::pow((g - 1.0) * target / g, 1.0 / (g - 1.0)), std::nullopt};
    }

    const double rho_s = std::pow(q2 / g, 1.0 / (g + 1.0));
    const double margin = target - sonic_bernoulli(pt);
    if (!(margin > 0.0))
        throw NoSubsonicRoot("no subsonic root: margin k0 + z - B(rho_s) = " +
                             std::to_string(margin));

    auto refine = [&](double lo, double hi, bool increasing) {
        // h(rho) = B(rho,q) - target; sign(h(lo)) = -sign(h(hi)) on entry
        // when increasing, swapped otherwise. Bisection first, then Newton
        // clipped to the bracket.
        const double width_goal = 1e-3 * rho_s;
        while (hi - lo > width_goal) {
            const double mid = 0.5 * (lo + hi);
            const double hm = bernoulli(mid, pt.q, g) - target;
            if ((hm < 0.0) == increasing) lo = mid; else hi = mid;
        }
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 100; ++it) {
            const double hx = bernoulli(x, pt.q, g) - target;
            if ((hx < 0.0) == increasing) lo = x; else hi = x;
            const double dx = bernoulli_drho(x, pt.q, g);
            double xn = x - hx / dx;
            if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
            if (std::abs(xn - x) <= 1e-15 * x) { x = xn; break; }
            x = xn;
        }
        return x;
    };

    // Subsonic bracket [rho_s, rho_hi]: the pressure term alone reaches the
    // target at rho_hi, so B(rho_hi) > target there.
    const double rho_hi = std::pow((g - 1.0) * target / g, 1.0 / (g - 1.0));
    // Supersonic bracket [rho_lo, rho_s]: the kinetic term alone reaches the
    // target at rho_lo.
    const double rho_lo = std::sqrt(0.5 * q2 / target);

    DensityRoots roots;
    roots.rho_sub = refine(rho_s, std::max(rho_hi, rho_s * (1.0 + 1e-14)), true);
    roots.rho_sup = refine(std::min(rho_lo, rho_s * (1.0 - 1e-14)), rho_s, false);
    return roots;
}

struct Jacobians {
    Mat2 dA_dq;   // for A = q / rho_sub
    Vec2 dA_dz;
    Vec2 dB_dq;   // for B = -rho_sub
    double dB_dz;
    double rho_sub;
    double kappa; // gamma rho_sub^{gamma+1} - |q|^2, the sonic distance
};

// Coefficients of the stream operator, from implicit differentiation of the
// pseudo-Bernoulli law at the subsonic root:
//   dA_i/dq_j = (1/rho)(delta_ij + q_i q_j / kappa)
//   d rho/dq  = -q rho / kappa,   d rho/dz = rho^3 / kappa,
// with kappa = gamma rho^{gamma+1} - |q|^2 > 0 strictly subsonic.
inline Jacobians stream_jacobians(const StreamPoint& pt, double kappa_floor = 1e-12) {
    const DensityRoots roots = solve_density_roots(pt);
    const double rho = roots.rho_sub;
    const double g = pt.gamma;
    const double q2 = norm2(pt.q);
    const double kappa = g * std::pow(rho, g + 1.0) - q2;
    if (kappa < kappa_floor * std::max(1.0, q2))
        throw SonicDegeneracy("selected root is sonic-degenerate: gamma rho^{gamma+1} - |q|^2 = " +
                              std::to_string(kappa));
    Jacobians J;
    J.rho_sub = rho;
    J.kappa = kappa;
    const double drho_dz = rho * rho * rho / kappa;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            J.dA_dq[i][j] = ((i == j ? 1.0 : 0.0) + pt.q[i] * pt.q[j] / kappa) / rho;
    J.dA_dz = {-pt.q[0] * rho / kappa, -pt.q[1] * rho / kappa};
    J.dB_dq = {pt.q[0] * rho / kappa, pt.q[1] * rho / kappa};
    J.dB_dz = -drho_dz;
    return J;
}

// A(z,q) = q / rho_sub, B(z,q) = -rho_sub.
struct FluxSource {
    Vec2 A;
    double B;
};

inline FluxSource flux_and_source(const StreamPoint& pt) {
    const double rho = solve_density_roots(pt).rho_sub;
    return {{pt.q[0] / rho, pt.q[1] / rho}, -rho};
}

} // namespace stream
} // namespace eplab
