#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "eplab/analysis.hpp"
#include "eplab/config.hpp"
#include "eplab/csv.hpp"
#include "eplab/expr.hpp"
#include "eplab/version.hpp"

namespace eplab {

// Exit codes, one per error family.
enum ExitCode : int {
    exit_ok = 0,
    exit_error = 1,      // unclassified
    exit_config = 2,     // bad usage, bad config, invariant violations
    exit_vacuum = 3,     // density left the admissible range
    exit_sonic = 4,      // sonic breakdown / no subsonic root / degeneracy
    exit_divergence = 5, // iteration diverged or failed to converge
    exit_solver = 6,     // linear algebra failure
};

namespace detail_run {

inline DopingProfile make_doping(const RunConfig& c) {
    BasisExpr w = BasisExpr::parse(c.effective_w_expr(), c.L);
    BasisExpr b = BasisExpr::parse(c.b_expr, c.L);
    const FieldCase fc = c.electric() ? FieldCase::electric : FieldCase::gravitational;
    return DopingProfile::make(
        fc, [w](double x) { return w.value(x); }, [w](double x) { return w.deriv(x); },
        [b](double x) { return b.value(x); }, c.L);
}

inline BoundaryData make_boundary(const RunConfig& c) {
    BoundaryData b;
    b.g0 = BasisExpr::parse(c.g0_expr, c.ell).as_boundary_function();
    b.h0 = BasisExpr::parse(c.h0_expr, c.ell).as_boundary_function();
    b.vL = BasisExpr::parse(c.vL_expr, c.ell).as_boundary_function();
    return b;
}

inline BackgroundProfile make_profile(const RunConfig& c, const PressureLaw& law,
                                      const DopingProfile& doping, int nsteps) {
    BackgroundOptions opt;
    opt.Phi0 = c.Phi0;
    opt.sonic_floor = c.sonic_floor;
    return integrate_background(law, doping, c.J, c.rho0, c.E0, c.L, nsteps, opt);
}

inline void write_manifest(const std::string& outdir, const std::string& sub,
                           const RunConfig& c) {
    std::ofstream out(outdir + "/manifest.cfg", std::ios::binary);
    if (!out) throw ConfigError("cannot write manifest in " + outdir);
    out << "# eplab " << kVersion << "\n";
    out << "# subcommand: " << sub << "\n";
    out << config_echo(c);
}

inline int run_background(const RunConfig& c, const std::string& outdir) {
    auto law = PressureLaw::polytropic(c.gamma);
    auto doping = make_doping(c);
    auto bg = make_profile(c, law, doping, c.nsteps);
    auto mach = mach_profile(bg, law);
    CsvWriter csv(outdir + "/background.csv",
                  {"x1", "rho_bar", "u_bar", "E_bar", "Phi_bar", "mach"});
    for (std::size_t i = 0; i < bg.x1.size(); ++i)
        csv.row({bg.x1[i], bg.rho_bar[i], bg.u_bar[i], bg.E_bar[i], bg.Phi_bar[i], mach[i]});
    return exit_ok;
}

inline void write_solution(const std::string& outdir, const SolutionState& s,
                           const IterationReport& rep) {
    CsvWriter fields(outdir + "/fields.csv",
                     {"x1", "x2", "phi_or_psi", "Phi", "rho", "u1", "u2", "mach"});
    for (int i = 0; i <= s.grid.nx; ++i)
        for (int j = 0; j <= s.grid.ny; ++j)
            fields.row({s.grid.x1(i), s.grid.x2(j), s.primary(i, j), s.Phi(i, j), s.rho(i, j),
                        s.u1(i, j), s.u2(i, j), s.mach(i, j)});
    CsvWriter iters(outdir + "/iterations.csv", {"iter", "residual", "ratio"});
    for (std::size_t k = 0; k < rep.residual_history.size(); ++k) {
        const bool has_ratio = k >= 1 && k - 1 < rep.contraction_ratios.size();
        const double ratio = has_ratio ? rep.contraction_ratios[k - 1]
                                       : std::numeric_limits<double>::quiet_NaN();
        iters.raw_row({std::to_string(k + 1), format_sig17(rep.residual_history[k]),
                       format_sig17(ratio)});
    }
}

inline int run_solve(Formulation form, const RunConfig& c, const std::string& outdir) {
    auto law = PressureLaw::polytropic(c.gamma);
    auto doping = make_doping(c);
    if (form == Formulation::potential && !c.electric())
        throw ConfigError("solve-potential pairs with case=electric (Case 1); "
                          "use solve-stream for gravitational fields");
    if (form == Formulation::stream && c.electric())
        throw ConfigError("solve-stream pairs with case=gravitational (Case 2); "
                          "use solve-potential for electric fields");
    NozzleGrid grid(c.L, c.ell, c.nx, c.ny);
    auto profile = make_profile(c, law, doping, c.background_refine * c.nx);
    auto bg = GridBackground::from_profile(profile, grid);
    NonlinearProblem prob(form, law, grid, bg, doping, make_boundary(c));
    PicardConfig pc;
    pc.tol = c.tol;
    pc.max_iter = c.max_iter;
    pc.damping = c.damping;
    auto [state, rep] = c.method == "newton" ? prob.newton_solve(pc) : prob.picard_solve(pc);
    write_solution(outdir, state, rep);
    if (!rep.converged) {
        std::cerr << "eplab: did not converge within " << rep.iterations << " iterations (last "
                  << "update " << rep.residual_history.back() << ")\n";
        return exit_divergence;
    }
    return exit_ok;
}

inline int run_audit(const RunConfig& c, const std::string& outdir) {
    ConvexityConfig cfg;
    cfg.n_pairs = c.n_pairs;
    cfg.n_t_samples = c.n_t_samples;
    cfg.seed = c.seed;
    ConvexityReport rep;
    std::string set_name;
    double threshold;
    if (c.electric()) {
        cfg.K = c.K0;
        auto law = PressureLaw::polytropic(c.gamma);
        rep = convexity_audit_potential(law, c.delta, cfg);
        set_name = "delta_subsonic";
        threshold = c.delta;
    } else {
        cfg.K = c.k0;
        if (c.gamma < 3.0)
            std::cerr << "eplab: note: the lambda-set is only certified convex for gamma >= 3; "
                         "gamma = " << c.gamma << " runs in counterexample-search mode\n";
        rep = convexity_audit_stream(c.gamma, c.lambda, cfg);
        set_name = "lambda_set";
        threshold = c.lambda;
    }
    CsvWriter csv(outdir + "/audit.csv", {"set", "gamma", "threshold", "pairs", "t_samples",
                                          "violations", "min_margin"});
    csv.raw_row({set_name, format_sig17(c.gamma), format_sig17(threshold),
                 std::to_string(rep.pairs_checked), std::to_string(c.n_t_samples),
                 std::to_string(rep.violations), format_sig17(rep.min_margin)});
    if (rep.worst) {
        CsvWriter ce(outdir + "/counterexample.csv",
                     {"z0", "q0x", "q0y", "z1", "q1x", "q1y", "t", "margin"});
        ce.row({rep.worst->z0, rep.worst->q0[0], rep.worst->q0[1], rep.worst->z1,
                rep.worst->q1[0], rep.worst->q1[1], rep.worst->t, rep.worst->margin});
    }
    return exit_ok;
}

inline int run_uniqueness(const RunConfig& c, const std::string& outdir) {
    auto law = PressureLaw::polytropic(c.gamma);
    auto doping = make_doping(c);
    const Formulation form = c.electric() ? Formulation::potential : Formulation::stream;
    if (!c.electric() && c.gamma < 3.0)
        std::cerr << "eplab: warning: gravitational uniqueness is only certified for "
                     "gamma >= 3; gamma = " << c.gamma
                  << " proceeds as an observation (counterexample) run\n";
    NozzleGrid grid(c.L, c.ell, c.nx, c.ny);
    auto profile = make_profile(c, law, doping, c.background_refine * c.nx);
    auto bg = GridBackground::from_profile(profile, grid);
    NonlinearProblem prob(form, law, grid, bg, doping, make_boundary(c));
    Rng rng(c.seed);
    auto guesses = make_multistart_guesses(grid, c.n_starts, c.guess_scale, rng);
    PicardConfig pc;
    pc.tol = c.tol;
    pc.max_iter = c.max_iter;
    pc.damping = c.damping;
    auto rep = multistart_uniqueness(prob, guesses, doping, pc);

    CsvWriter starts(outdir + "/starts.csv", {"start", "status"});
    for (std::size_t k = 0; k < rep.status.size(); ++k)
        starts.raw_row({std::to_string(k), rep.status[k]});
    CsvWriter pairs(outdir + "/uniqueness.csv",
                    {"start_a", "start_b", "distance", "energy_residual"});
    for (const auto& p : rep.pairs)
        pairs.raw_row({std::to_string(p.a), std::to_string(p.b), format_sig17(p.distance),
                       format_sig17(p.energy_residual)});
    if (rep.solutions.size() < 2) {
        std::cerr << "eplab: fewer than two starts converged; no pairwise comparison\n";
        return exit_divergence;
    }
    return exit_ok;
}

inline int run_coercivity(const RunConfig& c, const std::string& outdir) {
    if (!c.electric())
        throw ConfigError("coercivity-probe is defined for the electric case (min w > 0)");
    auto law = PressureLaw::polytropic(c.gamma);
    auto doping = make_doping(c);
    NozzleGrid grid(c.L, c.ell, c.nx, c.ny);
    auto profile = make_profile(c, law, doping, c.background_refine * c.nx);
    auto bg = GridBackground::from_profile(profile, grid);
    auto coefs = OperatorCoefficients::build(Formulation::potential, law, bg, doping, grid);
    Rng rng(c.seed);
    auto trials = make_random_trials(grid, c.n_trials, rng);
    auto rep = coercivity_probe(coefs, doping, trials);
    CsvWriter csv(outdir + "/coercivity.csv", {"trial", "margin"});
    for (std::size_t k = 0; k < rep.margins.size(); ++k)
        csv.raw_row({std::to_string(k), format_sig17(rep.margins[k])});
    CsvWriter summary(outdir + "/coercivity_summary.csv",
                      {"lambda0", "mu0", "wprime_sup", "min_margin"});
    summary.row({rep.lambda0, rep.mu0, doping.wprime_sup, rep.min_margin});
    return exit_ok;
}

} // namespace detail_run

// Orchestrate one subcommand: validate, write the manifest, run, emit CSVs.
// Deterministic given (subcommand, config, seed): reruns are byte-identical.
inline int run_subcommand(const std::string& sub, const RunConfig& cfg,
                          const std::string& outdir) {
    std::filesystem::create_directories(outdir);
    detail_run::write_manifest(outdir, sub, cfg);
    if (sub == "background") return detail_run::run_background(cfg, outdir);
    if (sub == "solve-potential") return detail_run::run_solve(Formulation::potential, cfg, outdir);
    if (sub == "solve-stream") return detail_run::run_solve(Formulation::stream, cfg, outdir);
    if (sub == "audit-convexity") return detail_run::run_audit(cfg, outdir);
    if (sub == "uniqueness-test") return detail_run::run_uniqueness(cfg, outdir);
    if (sub == "coercivity-probe") return detail_run::run_coercivity(cfg, outdir);
    throw ConfigError("unknown subcommand: " + sub);
}

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return exit_config;
    if (dynamic_cast<const VacuumError*>(&e)) return exit_vacuum;
    if (dynamic_cast<const SonicBreakdown*>(&e)) return exit_sonic;
    if (dynamic_cast<const NoSubsonicRoot*>(&e)) return exit_sonic;
    if (dynamic_cast<const SonicDegeneracy*>(&e)) return exit_sonic;
    if (dynamic_cast<const DivergenceError*>(&e)) return exit_divergence;
    if (dynamic_cast<const SolverError*>(&e)) return exit_solver;
    return exit_error;
}

} // namespace eplab
