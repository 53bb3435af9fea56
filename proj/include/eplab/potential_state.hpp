#pragma once

#include <array>
#include <cmath>
#include <string>

#include "eplab/errors.hpp"
#include "eplab/pressure_law.hpp"

namespace eplab {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm2(const Vec2& a) { return dot(a, a); }

// Potential-formulation state: z is the electrostatic potential value,
// q = grad(phi) the velocity, K0 the pseudo-Bernoulli constant. Density is
// recovered from i(rho) = K0 + z - |q|^2/2.
struct PotentialPoint {
    double z = 0.0;
    Vec2 q{0.0, 0.0};
    double K0 = 0.0;
};

namespace potential {

inline double bernoulli_argument(const PotentialPoint& pt) {
    return pt.K0 + pt.z - 0.5 * norm2(pt.q);
}

inline double density(const PressureLaw& law, const PotentialPoint& pt) {
    return law.enthalpy_inverse(bernoulli_argument(pt));
}

// A(z,q) = rho q (mass flux), B(z,q) = rho.
struct FluxSource {
    Vec2 A;
    double B;
};

inline FluxSource flux_and_source(const PressureLaw& law, const PotentialPoint& pt) {
    const double rho = density(law, pt);
    return {{rho * pt.q[0], rho * pt.q[1]}, rho};
}

// p'(rho(z,q)) - |q|^2: positive subsonic, zero sonic, negative supersonic.
// (z,q) lies in the delta-subsonic set P_delta iff this is >= delta.
inline double subsonic_margin(const PressureLaw& law, const PotentialPoint& pt) {
    return law.dp(density(law, pt)) - norm2(pt.q);
}

struct Jacobians {
    Mat2 dA_dq;   // d A_i / d q_j
    Vec2 dA_dz;   // d A / d z
    Vec2 dB_dq;   // d B / d q   (= -dA_dz identically)
    double dB_dz; // d B / d z
    double rho;
};

// dA_i/dq_j = (delta_ij - q_i q_j / p'(rho)) rho,  dA/dz = (rho/p') q,
// dB/dq = -(rho/p') q,  dB/dz = rho/p'.  The identity dA/dz + dB/dq = 0
// holds by construction.
inline Jacobians jacobians(const PressureLaw& law, const PotentialPoint& pt) {
    const double rho = density(law, pt);
    const double dp = law.dp(rho);
    Jacobians J;
    J.rho = rho;
    const double r = rho / dp;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            J.dA_dq[i][j] = ((i == j ? 1.0 : 0.0) - pt.q[i] * pt.q[j] / dp) * rho;
    J.dA_dz = {r * pt.q[0], r * pt.q[1]};
    J.dB_dq = {-r * pt.q[0], -r * pt.q[1]};
    J.dB_dz = r;
    return J;
}

} // namespace potential
} // namespace eplab
