#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "eplab/coercivity.hpp"
#include "eplab/rng.hpp"
#include "eplab/solver.hpp"

namespace eplab {

struct SegmentCounterexample {
    double z0 = 0.0, z1 = 0.0;
    Vec2 q0{0.0, 0.0}, q1{0.0, 0.0};
    double t = 0.0;
    double margin = 0.0;
};

struct ConvexityReport {
    long pairs_checked = 0;
    long violations = 0;
    double min_margin = std::numeric_limits<double>::infinity(); // along all paths
    std::optional<SegmentCounterexample> worst; // filled when violations > 0
};

struct ConvexityConfig {
    int n_pairs = 10000;
    int n_t_samples = 11;
    double K = 2.0; // pseudo-Bernoulli constant (K0 or k0)
    std::uint64_t seed = 0;
};

// Sample pairs in the delta-subsonic set and certify that entire segments
// stay in it, that the density along the segment never drops below the
// endpoint minimum, and that the margin is concave in t.
inline ConvexityReport convexity_audit_potential(const PressureLaw& law, double delta,
                                                 const ConvexityConfig& cfg) {
    if (!(delta > 0.0)) throw ConfigError("convexity audit requires delta > 0");
    for (int k = 0; k < 50; ++k) {
        const double rho = 1e-2 * std::pow(1e4, k / 49.0);
        if (law.uniqueness_condition_residual(rho) > 1e-8)
            throw ConfigError("pressure law violates the convexity hypothesis "
                              "d/drho(rho p''/p') <= 0 near rho = " + std::to_string(rho));
    }

    Rng rng(cfg.seed);
    const double zmax = 1.0 + std::abs(cfg.K);
    const double rho_top = law.enthalpy_inverse(cfg.K + zmax);
    const double qmax = 2.0 * std::sqrt(law.dp(rho_top));

    auto sample = [&]() -> std::optional<PotentialPoint> {
        PotentialPoint pt;
        pt.K0 = cfg.K;
        pt.z = rng.uniform(-zmax, zmax);
        pt.q = {rng.uniform(-qmax, qmax), rng.uniform(-qmax, qmax)};
        try {
            if (potential::subsonic_margin(law, pt) >= delta) return pt;
        } catch (const VacuumError&) {
        }
        return std::nullopt;
    };

    ConvexityReport rep;
    while (rep.pairs_checked < cfg.n_pairs) {
        auto a = sample(), b = sample();
        if (!a || !b) continue;
        ++rep.pairs_checked;
        const double rho_end_min =
            std::min(potential::density(law, *a), potential::density(law, *b));
        // upper density bound along the segment: z_t <= max(z0,z1) and the
        // kinetic term only lowers the enthalpy argument
        const double rho_cap = law.enthalpy_inverse(cfg.K + std::max(a->z, b->z));
        std::vector<double> s(std::size_t(cfg.n_t_samples));
        bool violated = false;
        double worst_margin = std::numeric_limits<double>::infinity();
        double worst_t = 0.0;
        for (int k = 0; k < cfg.n_t_samples; ++k) {
            const double t = double(k) / (cfg.n_t_samples - 1);
            PotentialPoint pt;
            pt.K0 = cfg.K;
            pt.z = (1.0 - t) * a->z + t * b->z;
            pt.q = {(1.0 - t) * a->q[0] + t * b->q[0], (1.0 - t) * a->q[1] + t * b->q[1]};
            double m;
            double rho_t;
            try {
                m = potential::subsonic_margin(law, pt);
                rho_t = potential::density(law, pt);
            } catch (const VacuumError&) {
                m = -std::numeric_limits<double>::infinity();
                rho_t = 0.0;
            }
            s[std::size_t(k)] = m;
            if (m < worst_margin) { worst_margin = m; worst_t = t; }
            if (m < delta - 1e-9) violated = true;
            if (rho_t < rho_end_min - 1e-9) violated = true;
            if (rho_t > rho_cap + 1e-9) violated = true;
        }
        // concavity of the margin along the segment: nonpositive second
        // differences up to roundoff
        for (int k = 1; k + 1 < cfg.n_t_samples; ++k) {
            const double d2 = s[std::size_t(k - 1)] - 2.0 * s[std::size_t(k)] + s[std::size_t(k + 1)];
            if (d2 > 1e-9 * std::max(1.0, std::abs(s[std::size_t(k)]))) violated = true;
        }
        rep.min_margin = std::min(rep.min_margin, worst_margin);
        if (violated) {
            ++rep.violations;
            if (!rep.worst || worst_margin < rep.worst->margin)
                rep.worst = SegmentCounterexample{a->z, b->z, a->q, b->q, worst_t, worst_margin};
        }
    }
    return rep;
}

// Stream-formulation lambda-set audit. For gamma >= 3 the set is convex and
// the audit certifies zero violations; for 1 < gamma < 3 it searches for a
// violating pair (the exponent 2(gamma-1)/(gamma+1) drops below 1 and
// |q|^alpha stops being convex), returning it in `worst`.
inline ConvexityReport convexity_audit_stream(double gamma, double lambda,
                                              const ConvexityConfig& cfg) {
    if (!(lambda > 0.0)) throw ConfigError("convexity audit requires lambda > 0");
    stream::require_gamma_above_one(gamma, "convexity_audit_stream");
    const double alpha = 2.0 * (gamma - 1.0) / (gamma + 1.0);
    StreamPoint unit{0.0, {1.0, 0.0}, 0.0, gamma};
    const double C = stream::sonic_bernoulli(unit);

    auto margin_of = [&](double z, const Vec2& q) {
        return cfg.K + z - C * std::pow(norm2(q), 0.5 * alpha);
    };

    Rng rng(cfg.seed);
    const double zmax = 1.0 + std::abs(cfg.K);
    const double qs = std::pow(std::max(cfg.K + zmax, 1e-12) / C, 1.0 / alpha);
    const double qmax = 2.0 * qs;

    ConvexityReport rep;

    auto check_pair = [&](double z0, Vec2 q0, double z1, Vec2 q1) {
        ++rep.pairs_checked;
        bool violated = false;
        double worst_margin = std::numeric_limits<double>::infinity();
        double worst_t = 0.0;
        for (int k = 0; k < cfg.n_t_samples; ++k) {
            const double t = double(k) / (cfg.n_t_samples - 1);
            const double zt = (1.0 - t) * z0 + t * z1;
            const Vec2 qt{(1.0 - t) * q0[0] + t * q1[0], (1.0 - t) * q0[1] + t * q1[1]};
            const double m = margin_of(zt, qt);
            if (m < worst_margin) { worst_margin = m; worst_t = t; }
            if (m < lambda - 1e-9) violated = true;
        }
        rep.min_margin = std::min(rep.min_margin, worst_margin);
        if (violated) {
            ++rep.violations;
            if (!rep.worst || worst_margin < rep.worst->margin)
                rep.worst = SegmentCounterexample{z0, z1, q0, q1, worst_t, worst_margin};
        }
    };

    if (gamma >= 3.0) {
        while (rep.pairs_checked < cfg.n_pairs) {
            const double z0 = rng.uniform(-zmax, zmax), z1 = rng.uniform(-zmax, zmax);
            const Vec2 q0{rng.uniform(-qmax, qmax), rng.uniform(-qmax, qmax)};
            const Vec2 q1{rng.uniform(-qmax, qmax), rng.uniform(-qmax, qmax)};
            if (margin_of(z0, q0) < lambda || margin_of(z1, q1) < lambda) continue;
            check_pair(z0, q0, z1, q1);
        }
        return rep;
    }

    // counterexample mode: structured near-antipodal pairs through small |q|
    // first, endpoints placed exactly on the margin-lambda boundary
    for (double frac : {0.0, 0.05, 0.25, 1.0}) {
        for (double theta : {0.0, 0.7, 2.1}) {
            const Vec2 e{std::cos(theta), std::sin(theta)};
            const double Q = 0.8 * qs;
            const Vec2 q0{-frac * Q * e[0], -frac * Q * e[1]};
            const Vec2 q1{Q * e[0], Q * e[1]};
            const double z0 = lambda - cfg.K + C * std::pow(norm2(q0), 0.5 * alpha);
            const double z1 = lambda - cfg.K + C * std::pow(norm2(q1), 0.5 * alpha);
            check_pair(z0, q0, z1, q1);
            if (rep.violations > 0 && rep.pairs_checked >= 4) return rep;
        }
    }
    while (rep.pairs_checked < cfg.n_pairs && rep.violations == 0) {
        const Vec2 q0{rng.uniform(-qmax, qmax), rng.uniform(-qmax, qmax)};
        const Vec2 q1{rng.uniform(-qmax, qmax), rng.uniform(-qmax, qmax)};
        const double z0 = lambda - cfg.K + C * std::pow(norm2(q0), 0.5 * alpha);
        const double z1 = lambda - cfg.K + C * std::pow(norm2(q1), 0.5 * alpha);
        check_pair(z0, q0, z1, q1);
    }
    return rep;
}

namespace detail {

// 11-point Gauss-Legendre on [0,1].
struct GL11 {
    std::array<double, 11> x, w;
    GL11() {
        const double xs[6] = {0.0, 0.2695431559523450, 0.5190961292068118,
                              0.7301520055740494, 0.8870625997680953, 0.9782286581460570};
        const double ws[6] = {0.2729250867779006, 0.2628045445102467, 0.2331937645919905,
                              0.1862902109277343, 0.1255803694649046, 0.0556685671161737};
        int k = 0;
        for (int m = 5; m >= 1; --m) { x[k] = 0.5 * (1.0 - xs[m]); w[k] = 0.5 * ws[m]; ++k; }
        x[k] = 0.5; w[k] = 0.5 * ws[0]; ++k;
        for (int m = 1; m <= 5; ++m) { x[k] = 0.5 * (1.0 + xs[m]); w[k] = 0.5 * ws[m]; ++k; }
    }
};

inline const GL11& gl11() {
    static const GL11 table;
    return table;
}

} // namespace detail

// Discrete counterpart of the summed uniqueness energy identity: returns the
// coercive left-hand quantity
//   Q = int <A_t> grad(D_u).grad(D_u) + (1/|w|) |grad(D_V)|^2 + <m_t> D_V^2
// with <.> the 11-point Gauss-Legendre average of the segment coefficients.
// Zero for identical states; <= discretization tolerance for two converged
// solutions of the same data. Throws if the segment leaves the admissible
// set, reporting the failing (t, node).
inline double energy_identity_residual(const PressureLaw& law, const SolutionState& a,
                                       const SolutionState& b, const DopingProfile& doping) {
    if (a.form != b.form) throw ConfigError("energy identity needs a common formulation");
    if (a.grid.nx != b.grid.nx || a.grid.ny != b.grid.ny)
        throw ConfigError("energy identity needs a common grid");
    if (std::abs(a.K - b.K) > 1e-12 * std::max(1.0, std::abs(a.K)))
        throw ConfigError("energy identity needs a common pseudo-Bernoulli constant");
    const NozzleGrid& g = a.grid;
    const Formulation form = a.form;

    // admissibility of the whole segment at t = 0, 0.1, ..., 1
    for (int k = 0; k <= 10; ++k) {
        const double t = 0.1 * k;
        for (int i = 0; i <= g.nx; ++i)
            for (int j = 0; j <= g.ny; ++j) {
                const double z = (1.0 - t) * a.Phi(i, j) + t * b.Phi(i, j);
                const Vec2 q{(1.0 - t) * a.q1(i, j) + t * b.q1(i, j),
                             (1.0 - t) * a.q2(i, j) + t * b.q2(i, j)};
                double m;
                if (form == Formulation::potential) {
                    try {
                        m = potential::subsonic_margin(law, {z, q, a.K});
                    } catch (const VacuumError&) {
                        m = -1.0;
                    }
                } else {
                    m = stream::lambda_margin({z, q, a.K, a.gamma});
                }
                if (!(m > 0.0))
                    throw ConfigError("segment leaves the admissible set at t = " +
                                      std::to_string(t) + ", node (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
            }
    }

    Field2D DPsi(g.nx, g.ny);
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j <= g.ny; ++j) DPsi(i, j) = b.Phi(i, j) - a.Phi(i, j);

    const auto& gl = detail::gl11();
    double Q = 0.0;
    for (int i = 0; i <= g.nx; ++i) {
        const double absw = std::abs(doping.w(g.x1(i)));
        for (int j = 0; j <= g.ny; ++j) {
            const double wq = detail::trapezoid_weight(g, i, j);
            const Vec2 Du{b.q1(i, j) - a.q1(i, j), b.q2(i, j) - a.q2(i, j)};
            const double DV = DPsi(i, j);
            const Vec2 DgV{detail::ddx_raw(DPsi, g, i, j), detail::ddy_raw(DPsi, g, i, j)};

            Mat2 Abar{{{0.0, 0.0}, {0.0, 0.0}}};
            double mbar = 0.0;
            for (int m = 0; m < 11; ++m) {
                const double t = gl.x[std::size_t(m)];
                const double z = (1.0 - t) * a.Phi(i, j) + t * b.Phi(i, j);
                const Vec2 q{(1.0 - t) * a.q1(i, j) + t * b.q1(i, j),
                             (1.0 - t) * a.q2(i, j) + t * b.q2(i, j)};
                PointDerivs d;
                if (form == Formulation::potential) {
                    auto J = potential::jacobians(law, {z, q, a.K});
                    d = {J.dA_dq, J.dA_dz, J.dB_dq, J.dB_dz};
                    mbar += gl.w[std::size_t(m)] * J.dB_dz; // rho/p' > 0
                } else {
                    auto J = stream::stream_jacobians({z, q, a.K, a.gamma});
                    d = {J.dA_dq, J.dA_dz, J.dB_dq, J.dB_dz};
                    mbar += gl.w[std::size_t(m)] * (-J.dB_dz); // d rho_sub/dz > 0
                }
                for (int r = 0; r < 2; ++r)
                    for (int s = 0; s < 2; ++s)
                        Abar[r][s] += gl.w[std::size_t(m)] * d.dA_dq[r][s];
            }
            double quad = 0.0;
            for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 2; ++s) quad += Du[r] * Abar[r][s] * Du[s];
            Q += wq * (quad + norm2(DgV) / absw + mbar * DV * DV);
        }
    }
    return Q;
}

struct MultistartReport {
    std::vector<std::string> status; // "converged" or the error text, per start
    std::vector<int> converged_indices;
    std::vector<SolutionState> solutions; // aligned with converged_indices
    struct Pair {
        int a, b;
        double distance;        // max over both fields of the node-wise gap
        double energy_residual; // discrete uniqueness certificate
    };
    std::vector<Pair> pairs;
    double max_distance = 0.0;
};

inline std::vector<std::pair<Field2D, Field2D>>
make_multistart_guesses(const NozzleGrid& g, int n, double scale, Rng& rng) {
    std::vector<std::pair<Field2D, Field2D>> out;
    out.emplace_back(Field2D(g), Field2D(g)); // background start
    for (int s = 1; s < n; ++s) {
        Field2D U(g), V(g);
        const double cu1 = rng.uniform(-1.0, 1.0), cu2 = rng.uniform(-1.0, 1.0);
        const double cv1 = rng.uniform(-1.0, 1.0), cv2 = rng.uniform(-1.0, 1.0);
        for (int i = 0; i <= g.nx; ++i)
            for (int j = 0; j <= g.ny; ++j) {
                const double x = g.x1(i), y = g.x2(j);
                U(i, j) = scale * (cu1 * std::sin(M_PI * x / g.L) * std::cos(M_PI * y / g.ell) +
                                   cu2 * x * (g.L - x) / (g.L * g.L));
                V(i, j) = scale * (cv1 * std::sin(2.0 * M_PI * x / g.L) +
                                   cv2 * std::cos(M_PI * y / g.ell) * x / g.L);
            }
        out.emplace_back(std::move(U), std::move(V));
    }
    return out;
}

// Run the Picard solver from each initial guess and compare the converged
// solutions pairwise, both in max norm and through the energy identity.
inline MultistartReport multistart_uniqueness(NonlinearProblem& prob,
                                              const std::vector<std::pair<Field2D, Field2D>>& guesses,
                                              const DopingProfile& doping,
                                              const PicardConfig& cfg = {}) {
    MultistartReport rep;
    for (const auto& [U0, V0] : guesses) {
        try {
            auto [state, it] = prob.picard_solve(cfg, &U0, &V0);
            if (!it.converged) {
                rep.status.push_back("not converged after " + std::to_string(it.iterations) +
                                     " iterations");
                continue;
            }
            rep.status.push_back("converged");
            rep.converged_indices.push_back(int(rep.status.size()) - 1);
            rep.solutions.push_back(std::move(state));
        } catch (const std::exception& e) {
            rep.status.push_back(std::string("error: ") + e.what());
        }
    }
    for (std::size_t p = 0; p < rep.solutions.size(); ++p)
        for (std::size_t q = p + 1; q < rep.solutions.size(); ++q) {
            const auto& A = rep.solutions[p];
            const auto& B = rep.solutions[q];
            const double dist =
                std::max(max_abs_diff(A.primary, B.primary), max_abs_diff(A.Phi, B.Phi));
            const double energy = energy_identity_residual(prob.law(), A, B, doping);
            rep.pairs.push_back({rep.converged_indices[p], rep.converged_indices[q], dist, energy});
            rep.max_distance = std::max(rep.max_distance, dist);
        }
    return rep;
}

} // namespace eplab
