#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "eplab/errors.hpp"

namespace eplab {

namespace detail {

// Adaptive Simpson on [a,b] (a<=b or a>b, handled by orientation).
inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm, double fb,
                                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol = 1e-13) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

} // namespace detail

// Numerical knobs for the generic (non-closed-form) law paths.
struct LawTolerances {
    double quadrature = 1e-13;  // adaptive Simpson target for the enthalpy
    double inverse_rel = 1e-12; // relative stop for the enthalpy inversion
};

// Barotropic pressure law p(rho) with p' > 0 and p'' >= 0 on (0,inf).
// Polytropic laws p = rho^gamma get closed-form enthalpy and inverse;
// custom laws fall back to adaptive quadrature and bracketed Newton.
class PressureLaw {
  public:
    enum class Kind { polytropic, custom };
    using Tolerances = LawTolerances;

    static PressureLaw polytropic(double gamma, LawTolerances tol = {}) {
        if (!(gamma >= 1.0))
            throw ConfigError("polytropic law requires gamma >= 1, got " + std::to_string(gamma));
        PressureLaw law;
        law.kind_ = Kind::polytropic;
        law.gamma_ = gamma;
        law.tol_ = tol;
        return law;
    }

    // Custom law from evaluators of p, p', p''. Two continuous derivatives
    // on (0,inf) are required; invariants are sampled on a log grid.
    static PressureLaw custom(std::function<double(double)> p,
                              std::function<double(double)> dp,
                              std::function<double(double)> d2p, LawTolerances tol = {}) {
        PressureLaw law;
        law.kind_ = Kind::custom;
        law.gamma_ = std::numeric_limits<double>::quiet_NaN();
        law.p_ = std::move(p);
        law.dp_ = std::move(dp);
        law.d2p_ = std::move(d2p);
        law.tol_ = tol;
        law.validate_samples();
        return law;
    }

    Kind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    bool is_polytropic() const { return kind_ == Kind::polytropic; }

    double pressure(double rho) const {
        require_positive(rho);
        return is_polytropic() ? std::pow(rho, gamma_) : p_(rho);
    }

    double dp(double rho) const {
        require_positive(rho);
        return is_polytropic() ? gamma_ * std::pow(rho, gamma_ - 1.0) : dp_(rho);
    }

    double d2p(double rho) const {
        require_positive(rho);
        return is_polytropic() ? gamma_ * (gamma_ - 1.0) * std::pow(rho, gamma_ - 2.0)
                               : d2p_(rho);
    }

    double sound_speed(double rho) const { return std::sqrt(dp(rho)); }

    // i(rho) = int_1^rho p'(s)/s ds, normalized so i(1) = 0.
    double enthalpy(double rho) const {
        require_positive(rho);
        if (is_polytropic()) {
            if (gamma_ == 1.0) return std::log(rho);
            return gamma_ / (gamma_ - 1.0) * (std::pow(rho, gamma_ - 1.0) - 1.0);
        }
        if (rho == 1.0) return 0.0;
        const auto& dp = dp_;
        return detail::adaptive_simpson([&dp](double s) { return dp(s) / s; }, 1.0, rho,
                                        tol_.quadrature);
    }

    // Lower bound of the range of i, i.e. lim_{rho->0+} i(rho).
    // Unbounded below for gamma = 1 (and any law with divergent integral).
    std::optional<double> vacuum_enthalpy() const {
        if (is_polytropic()) {
            if (gamma_ == 1.0) return std::nullopt;
            return -gamma_ / (gamma_ - 1.0);
        }
        // Probe the integral toward 0; treat it as unbounded if it keeps
        // descending without leveling off.
        double prev = enthalpy(1e-10);
        double next = enthalpy(1e-13);
        if (next < prev - 1.0) return std::nullopt;
        return next;
    }

    // Inverse of the enthalpy: rho with i(rho) = s, to 1e-12 relative.
    double enthalpy_inverse(double s) const {
        if (is_polytropic()) {
            if (gamma_ == 1.0) return std::exp(s);
            const double base = 1.0 + s * (gamma_ - 1.0) / gamma_;
            if (!(base > 0.0))
                throw VacuumError("enthalpy value " + std::to_string(s) +
                                  " at/below the vacuum limit " +
                                  std::to_string(-gamma_ / (gamma_ - 1.0)));
            return std::pow(base, 1.0 / (gamma_ - 1.0));
        }
        return invert_numeric(s);
    }

    // d/drho (rho p''/p'): the global-uniqueness hypothesis on the pressure
    // law holds pointwise when this is <= 0 (any polytropic law qualifies).
    double uniqueness_condition_residual(double rho) const {
        require_positive(rho);
        if (is_polytropic()) return 0.0; // rho p''/p' = gamma - 1 identically
        const double h = 1e-6 * rho;
        auto g = [this](double r) { return r * d2p_(r) / dp_(r); };
        return (g(rho + h) - g(rho - h)) / (2.0 * h);
    }

  private:
    PressureLaw() = default;

    static void require_positive(double rho) {
        if (!(rho > 0.0))
            throw std::domain_error("density must be positive, got " + std::to_string(rho));
    }

    void validate_samples() const {
        // p(0)=0, p -> inf, p' > 0, p'' >= 0, sampled on a log grid.
        const double lo = 1e-3, hi = 1e3;
        const int n = 61;
        double pprev = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; ++k) {
            const double rho = lo * std::pow(hi / lo, double(k) / (n - 1));
            const double p = p_(rho);
            if (!(p >= pprev))
                throw ConfigError("custom pressure law is not nondecreasing near rho=" +
                                  std::to_string(rho));
            if (!(dp_(rho) > 0.0))
                throw ConfigError("custom pressure law violates p' > 0 at rho=" +
                                  std::to_string(rho));
            if (d2p_(rho) < -1e-12 * std::max(1.0, std::abs(dp_(rho))))
                throw ConfigError("custom pressure law violates p'' >= 0 at rho=" +
                                  std::to_string(rho));
            pprev = p;
        }
        if (std::abs(p_(lo * lo)) > 1e-3)
            throw ConfigError("custom pressure law does not vanish at rho -> 0");
    }

    double invert_numeric(double s) const {
        // Bracket by doubling/halving from rho = 1, then safeguarded Newton.
        double lo = 1.0, hi = 1.0;
        if (enthalpy(1.0) < s) {
            while (enthalpy(hi) < s) {
                hi *= 2.0;
                if (hi > 1e100) throw SolverError("enthalpy inverse bracket exploded");
            }
        } else {
            while (enthalpy(lo) > s) {
                lo *= 0.5;
                if (lo < 1e-100)
                    throw VacuumError("enthalpy value below numerical vacuum limit");
            }
        }
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            const double fx = enthalpy(x) - s;
            if (fx > 0.0) hi = x; else lo = x;
            const double dfx = dp(x) / x;
            double step = fx / dfx;
            double xn = x - step;
            if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
            if (std::abs(xn - x) <= 0.1 * tol_.inverse_rel * std::abs(x)) return xn;
            x = xn;
        }
        return x;
    }

    Kind kind_ = Kind::polytropic;
    double gamma_ = 1.4;
    Tolerances tol_;
    std::function<double(double)> p_, dp_, d2p_;
};

inline double enthalpy(const PressureLaw& law, double rho) { return law.enthalpy(rho); }
inline double enthalpy_inverse(const PressureLaw& law, double s) { return law.enthalpy_inverse(s); }
inline double sound_speed(const PressureLaw& law, double rho) { return law.sound_speed(rho); }
inline double uniqueness_condition_residual(const PressureLaw& law, double rho) {
    return law.uniqueness_condition_residual(rho);
}

} // namespace eplab
