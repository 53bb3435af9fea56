#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "eplab/errors.hpp"
#include "eplab/pressure_law.hpp"

namespace eplab {

enum class FieldCase { electric, gravitational };

inline const char* to_string(FieldCase c) {
    return c == FieldCase::electric ? "electric" : "gravitational";
}

// Poisson source data: Delta Phi = w(x1) rho - b(x1). The coupling weight w
// must be sign-definite: min w > 0 in the electric case, max w < 0 in the
// gravitational case.
struct DopingProfile {
    std::function<double(double)> w;
    std::function<double(double)> wprime;
    std::function<double(double)> b;
    FieldCase field_case = FieldCase::electric;
    double mu = 0.0;         // min w (electric) or max w (gravitational)
    double wprime_sup = 0.0; // sup |w'| on [0,L]

    static DopingProfile make(FieldCase c,
                              std::function<double(double)> w,
                              std::function<double(double)> wprime,
                              std::function<double(double)> b,
                              double L,
                              int nsamples = 4097) {
        DopingProfile d;
        d.field_case = c;
        d.w = std::move(w);
        d.wprime = std::move(wprime);
        d.b = std::move(b);
        double wmin = d.w(0.0), wmax = d.w(0.0), wpmax = std::abs(d.wprime(0.0));
        for (int k = 1; k < nsamples; ++k) {
            const double x = L * double(k) / (nsamples - 1);
            const double wx = d.w(x);
            wmin = std::min(wmin, wx);
            wmax = std::max(wmax, wx);
            wpmax = std::max(wpmax, std::abs(d.wprime(x)));
        }
        if (c == FieldCase::electric) {
            if (!(wmin > 0.0))
                throw ConfigError("Case 1 (electric) requires min w > 0 on [0,L]; sampled min = " +
                                  std::to_string(wmin));
            d.mu = wmin;
        } else {
            if (!(wmax < 0.0))
                throw ConfigError("Case 2 (gravitational) requires max w < 0 on [0,L]; sampled max = " +
                                  std::to_string(wmax));
            d.mu = wmax;
        }
        d.wprime_sup = wpmax;
        return d;
    }
};

// 1D subsonic background on [0,L]: nodes x1_i = i L / nsteps with
// rho_bar u_bar = J, E_bar = Phi_bar', phi_bar = int_0^x u_bar.
struct BackgroundProfile {
    double L = 1.0;
    double J = 1.0;
    double gamma = 1.4; // recorded from the law used to integrate
    std::vector<double> x1;
    std::vector<double> rho_bar;
    std::vector<double> E_bar;
    std::vector<double> Phi_bar;
    std::vector<double> u_bar;
    std::vector<double> phi_bar;
    double K0 = 0.0;              // 1/2 u^2(0) + i(rho(0)) - Phi(0)
    double k0_stream = 0.0;       // 1/2 u^2(0) + gamma rho^{g-1}(0)/(g-1) - Phi(0)
    double subsonic_margin = 0.0; // min over nodes of p'(rho) - u^2

    int nsteps() const { return int(x1.size()) - 1; }

    // Keep every stride-th node (endpoints included). Used to hand an
    // oversampled integration to a coarser 2D grid.
    BackgroundProfile downsample(int stride) const {
        BackgroundProfile out = *this;
        out.x1.clear(); out.rho_bar.clear(); out.E_bar.clear();
        out.Phi_bar.clear(); out.u_bar.clear(); out.phi_bar.clear();
        for (std::size_t k = 0; k < x1.size(); k += std::size_t(stride)) {
            out.x1.push_back(x1[k]);
            out.rho_bar.push_back(rho_bar[k]);
            out.E_bar.push_back(E_bar[k]);
            out.Phi_bar.push_back(Phi_bar[k]);
            out.u_bar.push_back(u_bar[k]);
            out.phi_bar.push_back(phi_bar[k]);
        }
        return out;
    }
};

struct BackgroundOptions {
    double Phi0 = 0.0;         // gauge for Phi_bar(0)
    double sonic_floor = 1e-8; // breakdown when p'(rho) - J^2/rho^2 < floor
};

// Classical fixed-step RK4 for
//   rho' = rho E / (p'(rho) - J^2/rho^2),   E' = w rho - b,
// with Phi and phi accumulated by the same scheme (Phi' = E, phi' = J/rho).
inline BackgroundProfile integrate_background(const PressureLaw& law,
                                              const DopingProfile& doping,
                                              double J, double rho0, double E0,
                                              double L, int nsteps,
                                              const BackgroundOptions& opt = {}) {
    if (!(rho0 > 0.0)) throw VacuumError("rho0 must be positive");
    if (!(J > 0.0)) throw ConfigError("mass flux J must be positive");
    if (nsteps < 1) throw ConfigError("nsteps must be >= 1");

    struct State { double rho, E, Phi, phi; };
    auto deriv = [&](double x, const State& s) -> State {
        if (!(s.rho > 0.0))
            throw VacuumError("background density became non-positive at x1=" + std::to_string(x));
        const double denom = law.dp(s.rho) - J * J / (s.rho * s.rho);
        if (denom < opt.sonic_floor)
            throw SonicBreakdown("subsonicity lost at x1=" + std::to_string(x) +
                                 ": p'(rho) - J^2/rho^2 = " + std::to_string(denom));
        return {s.rho * s.E / denom, doping.w(x) * s.rho - doping.b(x), s.E, J / s.rho};
    };

    const double h = L / nsteps;
    BackgroundProfile out;
    out.L = L;
    out.J = J;
    out.gamma = law.is_polytropic() ? law.gamma() : std::numeric_limits<double>::quiet_NaN();

    State s{rho0, E0, opt.Phi0, 0.0};
    auto push = [&](double x, const State& st) {
        out.x1.push_back(x);
        out.rho_bar.push_back(st.rho);
        out.E_bar.push_back(st.E);
        out.Phi_bar.push_back(st.Phi);
        out.u_bar.push_back(J / st.rho);
        out.phi_bar.push_back(st.phi);
    };
    push(0.0, s);
    for (int k = 0; k < nsteps; ++k) {
        const double x = k * h;
        const State k1 = deriv(x, s);
        const State s2{s.rho + 0.5 * h * k1.rho, s.E + 0.5 * h * k1.E,
                       s.Phi + 0.5 * h * k1.Phi, s.phi + 0.5 * h * k1.phi};
        const State k2 = deriv(x + 0.5 * h, s2);
        const State s3{s.rho + 0.5 * h * k2.rho, s.E + 0.5 * h * k2.E,
                       s.Phi + 0.5 * h * k2.Phi, s.phi + 0.5 * h * k2.phi};
        const State k3 = deriv(x + 0.5 * h, s3);
        const State s4{s.rho + h * k3.rho, s.E + h * k3.E,
                       s.Phi + h * k3.Phi, s.phi + h * k3.phi};
        const State k4 = deriv(x + h, s4);
        s.rho += h / 6.0 * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho);
        s.E   += h / 6.0 * (k1.E   + 2.0 * k2.E   + 2.0 * k3.E   + k4.E);
        s.Phi += h / 6.0 * (k1.Phi + 2.0 * k2.Phi + 2.0 * k3.Phi + k4.Phi);
        s.phi += h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
        if (!(s.rho > 0.0))
            throw VacuumError("background density became non-positive at x1=" +
                              std::to_string((k + 1) * h));
        push((k + 1) * h, s);
    }

    out.K0 = 0.5 * out.u_bar[0] * out.u_bar[0] + law.enthalpy(out.rho_bar[0]) - out.Phi_bar[0];
    if (law.is_polytropic() && law.gamma() > 1.0) {
        const double g = law.gamma();
        out.k0_stream = 0.5 * out.u_bar[0] * out.u_bar[0] +
                        g / (g - 1.0) * std::pow(out.rho_bar[0], g - 1.0) - out.Phi_bar[0];
    } else {
        out.k0_stream = std::numeric_limits<double>::quiet_NaN();
    }

    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.x1.size(); ++i) {
        margin = std::min(margin, law.dp(out.rho_bar[i]) - out.u_bar[i] * out.u_bar[i]);
    }
    out.subsonic_margin = margin;
    if (!(margin > 0.0))
        throw SonicBreakdown("integrated profile is not subsonic: min margin = " +
                             std::to_string(margin));
    return out;
}

inline std::vector<double> mach_profile(const BackgroundProfile& bg, const PressureLaw& law) {
    std::vector<double> m(bg.x1.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        m[i] = bg.u_bar[i] / law.sound_speed(bg.rho_bar[i]);
    return m;
}

} // namespace eplab
