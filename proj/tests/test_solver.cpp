#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "eplab/solver.hpp"
#include "support/fixtures.hpp"
#include "support/mms.hpp"

using namespace eplab;

namespace {

struct Setup {
    PressureLaw law;
    NozzleGrid grid;
    DopingProfile doping;
    GridBackground bg;
};

Setup electric_setup(int nx, int ny) {
    auto law = PressureLaw::polytropic(1.4);
    NozzleGrid grid(1.0, 1.0, nx, ny);
    auto doping = fixtures::electric_unit(1.0);
    auto bg = fixtures::background_for_grid(law, doping, 0.5, 1.0, 0.1, grid);
    return {law, grid, doping, bg};
}

Setup gravitational_setup(int nx, int ny) {
    auto law = PressureLaw::polytropic(3.0);
    NozzleGrid grid(1.0, 1.0, nx, ny);
    auto doping = fixtures::gravitational_unit(1.0);
    auto bg = fixtures::background_for_grid(law, doping, 0.3, 1.0, 0.0, grid);
    return {law, grid, doping, bg};
}

} // namespace

TEST_CASE("zero-perturbation solve reproduces the background (potential)") {
    auto s = electric_setup(32, 16);
    NonlinearProblem prob(Formulation::potential, s.law, s.grid, s.bg, s.doping,
                          fixtures::zero_boundary());
    auto [state, rep] = prob.picard_solve();
    REQUIRE(rep.converged);
    REQUIRE(rep.iterations <= 2);
    REQUIRE(rep.residual_history.back() <= 1e-10);
    REQUIRE(state.U.max_abs() == 0.0);
    REQUIRE(state.V.max_abs() == 0.0);
    for (int i = 0; i <= s.grid.nx; ++i)
        for (int j = 0; j <= s.grid.ny; ++j) {
            REQUIRE(state.primary(i, j) == s.bg.phi[i]);
            REQUIRE(state.Phi(i, j) == s.bg.Phi[i]);
            REQUIRE(std::abs(state.rho(i, j) - s.bg.rho[i]) <= 1e-10);
            REQUIRE(std::abs(state.u1(i, j) - s.bg.u[i]) <= 1e-10);
            REQUIRE(state.u2(i, j) == 0.0);
        }
    REQUIRE(state.subsonic);
    REQUIRE(state.margin_min > 0.0);
}

TEST_CASE("zero-perturbation solve reproduces the background (stream)") {
    auto s = gravitational_setup(32, 16);
    NonlinearProblem prob(Formulation::stream, s.law, s.grid, s.bg, s.doping,
                          fixtures::zero_boundary());
    auto [state, rep] = prob.picard_solve();
    REQUIRE(rep.converged);
    REQUIRE(rep.iterations <= 2);
    for (int i = 0; i <= s.grid.nx; ++i)
        for (int j = 0; j <= s.grid.ny; ++j) {
            REQUIRE(state.primary(i, j) == Catch::Approx(s.bg.J * s.grid.x2(j)).margin(1e-15));
            REQUIRE(std::abs(state.rho(i, j) - s.bg.rho[i]) <= 1e-10);
            REQUIRE(std::abs(state.u1(i, j) - s.bg.u[i]) <= 1e-10);
            REQUIRE(state.u2(i, j) == Catch::Approx(0.0).margin(1e-15));
        }
    REQUIRE(state.subsonic);
}

TEST_CASE("small-data solve: convergence, Bernoulli invariant, conservation") {
    auto s = electric_setup(32, 16);
    NonlinearProblem prob(Formulation::potential, s.law, s.grid, s.bg, s.doping,
                          fixtures::electric_boundary(1e-2, 1.0));
    auto [state, rep] = prob.picard_solve();
    REQUIRE(rep.converged);
    REQUIRE(rep.final_nonlinear_residual <= 10.0 * 1e-10);
    REQUIRE(state.subsonic);

    // Bernoulli invariant at every node: |q|^2/2 + i(rho) - Phi = K0 to
    // density-recovery tolerance
    for (int i = 0; i <= s.grid.nx; ++i)
        for (int j = 0; j <= s.grid.ny; ++j) {
            const double q2 = state.q1(i, j) * state.q1(i, j) + state.q2(i, j) * state.q2(i, j);
            const double inv = 0.5 * q2 + s.law.enthalpy(state.rho(i, j)) - state.Phi(i, j);
            REQUIRE(std::abs(inv - s.bg.K0) <= 1e-10);
        }

    // cross-section mass flux (trapezoid) constant across interior sections
    auto flux_at = [&](int i) {
        double f = 0.0;
        for (int j = 0; j < s.grid.ny; ++j)
            f += 0.5 * s.grid.hy *
                 (state.rho(i, j) * state.u1(i, j) + state.rho(i, j + 1) * state.u1(i, j + 1));
        return f;
    };
    const double f0 = flux_at(1);
    double dev = 0.0;
    for (int i = 1; i < s.grid.nx; ++i) dev = std::max(dev, std::abs(flux_at(i) - f0));
    const double err_mms = mms::potential_mms_error(s.grid.nx, s.grid.ny);
    REQUIRE(dev <= 3.0 * err_mms);
}

TEST_CASE("small-data stream solve converges with Bernoulli residual") {
    auto s = gravitational_setup(32, 16);
    NonlinearProblem prob(Formulation::stream, s.law, s.grid, s.bg, s.doping,
                          fixtures::gravitational_boundary(1e-2, 1.0));
    auto [state, rep] = prob.picard_solve();
    REQUIRE(rep.converged);
    REQUIRE(state.subsonic);
    for (int i = 0; i <= s.grid.nx; ++i)
        for (int j = 0; j <= s.grid.ny; ++j) {
            const Vec2 q{state.q1(i, j), state.q2(i, j)};
            const double bern = stream::bernoulli(state.rho(i, j), q, s.bg.gamma);
            REQUIRE(std::abs(bern - state.Phi(i, j) - s.bg.k0) <= 1e-10);
        }
}

TEST_CASE("converged solutions satisfy the physical boundary conditions") {
    { // potential: inflow mass flux, wall no-penetration, outlet field
        auto s = electric_setup(32, 16);
        auto bdata = fixtures::electric_boundary(1e-2, 1.0);
        NonlinearProblem prob(Formulation::potential, s.law, s.grid, s.bg, s.doping, bdata);
        auto [state, rep] = prob.picard_solve();
        REQUIRE(rep.converged);
        for (int j = 0; j <= s.grid.ny; ++j) {
            const double y = s.grid.x2(j);
            const double flux = state.rho(0, j) * state.u1(0, j);
            REQUIRE(std::abs(flux - (0.5 + bdata.g0.value(y))) <= 5e-6);
            REQUIRE(state.Phi(0, j) ==
                    Catch::Approx(s.bg.Phi[0] + bdata.h0.value(y)).margin(1e-14));
            // outlet: dPhi/dx(L) = E(L) + vL, one-sided discrete check
            const double got = (3 * state.Phi(s.grid.nx, j) - 4 * state.Phi(s.grid.nx - 1, j) +
                                state.Phi(s.grid.nx - 2, j)) /
                               (2 * s.grid.hx);
            const double EL = (3 * s.bg.Phi[s.grid.nx] - 4 * s.bg.Phi[s.grid.nx - 1] +
                               s.bg.Phi[s.grid.nx - 2]) /
                              (2 * s.grid.hx);
            REQUIRE(std::abs(got - (EL + bdata.vL.value(y))) <= 1e-4);
        }
        for (int i = 0; i <= s.grid.nx; ++i) {
            REQUIRE(state.u2(i, 0) == 0.0);
            REQUIRE(state.u2(i, s.grid.ny) == 0.0);
        }
    }
    { // stream: psi trace on the inlet/walls, zero normal flux at the outlet
        auto s = gravitational_setup(32, 16);
        auto bdata = fixtures::gravitational_boundary(1e-2, 1.0);
        NonlinearProblem prob(Formulation::stream, s.law, s.grid, s.bg, s.doping, bdata);
        auto [state, rep] = prob.picard_solve();
        REQUIRE(rep.converged);
        for (int j = 0; j <= s.grid.ny; ++j) {
            const double y = s.grid.x2(j);
            REQUIRE(state.primary(0, j) ==
                    Catch::Approx(0.3 * y + bdata.g0.antideriv(y)).margin(1e-12));
            REQUIRE(std::abs(state.q1(s.grid.nx, j)) <= 1e-5);
        }
        for (int i = 0; i <= s.grid.nx; ++i) {
            REQUIRE(state.primary(i, 0) == Catch::Approx(0.0).margin(1e-12));
            REQUIRE(state.primary(i, s.grid.ny) ==
                    Catch::Approx(0.3 + bdata.g0.antideriv(1.0)).margin(1e-12));
        }
    }
}

TEST_CASE("contraction ratios shrink linearly with the data scale") {
    auto s = electric_setup(24, 12);
    PicardConfig cfg;
    cfg.tol = 1e-13;
    auto ratio_at = [&](double eps) {
        NonlinearProblem prob(Formulation::potential, s.law, s.grid, s.bg, s.doping,
                              fixtures::electric_boundary(eps, 1.0));
        auto [state, rep] = prob.picard_solve(cfg);
        REQUIRE(rep.converged);
        const double r = rep.representative_ratio(1e-11);
        REQUIRE(r > 0.0);
        REQUIRE(r < 1.0);
        return r;
    };
    const double r1 = ratio_at(1e-2);
    const double r2 = ratio_at(5e-3);
    REQUIRE(r2 <= 0.75 * r1);
}

TEST_CASE("far-out-of-regime data converges or raises a declared error") {
    auto s = electric_setup(16, 8);
    NonlinearProblem prob(Formulation::potential, s.law, s.grid, s.bg, s.doping,
                          fixtures::electric_boundary(10.0, 1.0));
    try {
        auto [state, rep] = prob.picard_solve();
        REQUIRE((rep.converged || rep.iterations == 100)); // recorded outcome
    } catch (const DivergenceError&) {
        SUCCEED("diverged loudly");
    } catch (const VacuumError&) {
        SUCCEED("left the admissible set");
    } catch (const NoSubsonicRoot&) {
        SUCCEED("left the admissible set");
    }
}

TEST_CASE("damped Picard reaches the same fixed point") {
    auto s = electric_setup(16, 8);
    NonlinearProblem prob(Formulation::potential, s.law, s.grid, s.bg, s.doping,
                          fixtures::electric_boundary(1e-2, 1.0));
    auto [a, ra] = prob.picard_solve();
    PicardConfig damped;
    damped.damping = 0.7;
    damped.max_iter = 200;
    NonlinearProblem prob2(Formulation::potential, s.law, s.grid, s.bg, s.doping,
                           fixtures::electric_boundary(1e-2, 1.0));
    auto [b, rb] = prob2.picard_solve(damped);
    REQUIRE(ra.converged);
    REQUIRE(rb.converged);
    REQUIRE(max_abs_diff(a.U, b.U) <= 1e-8);
    REQUIRE(max_abs_diff(a.V, b.V) <= 1e-8);
}

TEST_CASE("Newton cross-check agrees with Picard (potential)") {
    auto s = electric_setup(16, 8);
    NonlinearProblem prob(Formulation::potential, s.law, s.grid, s.bg, s.doping,
                          fixtures::electric_boundary(1e-2, 1.0));
    auto [p, rp] = prob.picard_solve();
    auto [n, rn] = prob.newton_solve();
    REQUIRE(rp.converged);
    REQUIRE(rn.converged);
    REQUIRE(rn.iterations <= rp.iterations); // quadratic vs linear convergence
    REQUIRE(max_abs_diff(p.U, n.U) <= 1e-9);
    REQUIRE(max_abs_diff(p.V, n.V) <= 1e-9);
}

TEST_CASE("Newton cross-check agrees with Picard (stream)") {
    auto s = gravitational_setup(16, 8);
    NonlinearProblem prob(Formulation::stream, s.law, s.grid, s.bg, s.doping,
                          fixtures::gravitational_boundary(1e-2, 1.0));
    auto [p, rp] = prob.picard_solve();
    auto [n, rn] = prob.newton_solve();
    REQUIRE(rp.converged);
    REQUIRE(rn.converged);
    REQUIRE(max_abs_diff(p.U, n.U) <= 1e-9);
    REQUIRE(max_abs_diff(p.V, n.V) <= 1e-9);
}

TEST_CASE("iteration report invariants") {
    auto s = electric_setup(16, 8);
    NonlinearProblem prob(Formulation::potential, s.law, s.grid, s.bg, s.doping,
                          fixtures::electric_boundary(1e-3, 1.0));
    auto [state, rep] = prob.picard_solve();
    REQUIRE(rep.converged);
    REQUIRE(rep.residual_history.size() == std::size_t(rep.iterations));
    REQUIRE(rep.residual_history.back() <= 1e-10);
    REQUIRE(rep.contraction_ratios.size() + 1 == rep.residual_history.size());
}
