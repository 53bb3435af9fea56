#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "eplab/errors.hpp"

namespace eplab {

// Plain-text key=value run description. '#' starts a comment; keys are
// validated against the known set eagerly, with line numbers in diagnostics.
struct RunConfig {
    double gamma = 1.4;
    std::string field_case = "electric"; // electric | gravitational
    double L = 1.0;
    double ell = 1.0;
    int nx = 64;
    int ny = 32;
    double J = 0.5;
    double rho0 = 1.0;
    double E0 = 0.0;
    double Phi0 = 0.0;
    std::string w_expr;        // empty: defaults to "1" / "-1" by case
    std::string b_expr = "0";
    std::string g0_expr = "0";
    std::string h0_expr = "0";
    std::string vL_expr = "0";
    double tol = 1e-10;
    int max_iter = 100;
    double damping = 1.0;
    std::string method = "picard"; // picard | newton
    int nsteps = 256;
    int background_refine = 64;
    double sonic_floor = 1e-8;
    double delta = 0.1;
    double lambda = 0.1;
    int n_pairs = 10000;
    int n_t_samples = 11;
    double K0 = 2.0;
    double k0 = 2.0;
    int n_starts = 3;
    double guess_scale = 0.01;
    int n_trials = 64;
    std::uint64_t seed = 0;

    bool electric() const { return field_case == "electric"; }

    std::string effective_w_expr() const {
        if (!w_expr.empty()) return w_expr;
        return electric() ? "1" : "-1";
    }
};

namespace detail {

inline double parse_double(const std::string& v, int line) {
    double x = 0.0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError("line " + std::to_string(line) + ": expected a number, got '" + v + "'");
    return x;
}

inline int parse_int(const std::string& v, int line) {
    int x = 0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError("line " + std::to_string(line) + ": expected an integer, got '" + v + "'");
    return x;
}

inline std::uint64_t parse_u64(const std::string& v, int line) {
    std::uint64_t x = 0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError("line " + std::to_string(line) + ": expected an unsigned integer, got '" +
                          v + "'");
    return x;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace detail

inline RunConfig parse_config_text(std::istream& in) {
    RunConfig c;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        if (const auto hash = s.find('#'); hash != std::string::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected key=value, got '" + s +
                              "'");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        using detail::parse_double;
        using detail::parse_int;
        if (key == "gamma") c.gamma = parse_double(val, line);
        else if (key == "case") {
            if (val != "electric" && val != "gravitational")
                throw ConfigError("line " + std::to_string(line) +
                                  ": case must be 'electric' (Case 1, min w > 0) or "
                                  "'gravitational' (Case 2, max w < 0)");
            c.field_case = val;
        }
        else if (key == "L") c.L = parse_double(val, line);
        else if (key == "ell") c.ell = parse_double(val, line);
        else if (key == "nx") c.nx = parse_int(val, line);
        else if (key == "ny") c.ny = parse_int(val, line);
        else if (key == "J") c.J = parse_double(val, line);
        else if (key == "rho0") c.rho0 = parse_double(val, line);
        else if (key == "E0") c.E0 = parse_double(val, line);
        else if (key == "Phi0") c.Phi0 = parse_double(val, line);
        else if (key == "w_expr") c.w_expr = val;
        else if (key == "b_expr") c.b_expr = val;
        else if (key == "g0_expr") c.g0_expr = val;
        else if (key == "h0_expr") c.h0_expr = val;
        else if (key == "vL_expr") c.vL_expr = val;
        else if (key == "tol") c.tol = parse_double(val, line);
        else if (key == "max_iter") c.max_iter = parse_int(val, line);
        else if (key == "damping") c.damping = parse_double(val, line);
        else if (key == "method") {
            if (val != "picard" && val != "newton")
                throw ConfigError("line " + std::to_string(line) +
                                  ": method must be 'picard' or 'newton'");
            c.method = val;
        }
        else if (key == "nsteps") c.nsteps = parse_int(val, line);
        else if (key == "background_refine") c.background_refine = parse_int(val, line);
        else if (key == "sonic_floor") c.sonic_floor = parse_double(val, line);
        else if (key == "delta") c.delta = parse_double(val, line);
        else if (key == "lambda") c.lambda = parse_double(val, line);
        else if (key == "n_pairs") c.n_pairs = parse_int(val, line);
        else if (key == "n_t_samples") c.n_t_samples = parse_int(val, line);
        else if (key == "K0") c.K0 = parse_double(val, line);
        else if (key == "k0") c.k0 = parse_double(val, line);
        else if (key == "n_starts") c.n_starts = parse_int(val, line);
        else if (key == "guess_scale") c.guess_scale = parse_double(val, line);
        else if (key == "n_trials") c.n_trials = parse_int(val, line);
        else if (key == "seed") c.seed = detail::parse_u64(val, line);
        else
            throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }

    if (!(c.gamma >= 1.0)) throw ConfigError("gamma must be >= 1");
    if (c.nx < 4 || c.ny < 4) throw ConfigError("nx and ny must be >= 4");
    if (!(c.L > 0.0) || !(c.ell > 0.0)) throw ConfigError("L and ell must be positive");
    if (!(c.J > 0.0)) throw ConfigError("J must be positive");
    if (!(c.damping > 0.0 && c.damping <= 1.0)) throw ConfigError("damping must be in (0,1]");
    if (c.n_t_samples < 3) throw ConfigError("n_t_samples must be >= 3");
    if (c.n_starts < 1) throw ConfigError("n_starts must be >= 1");
    return c;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config_text(in);
}

// Normalized config echo: every effective key, in a fixed order, parseable
// by parse_config. The manifest written next to run outputs is exactly this.
inline std::string config_echo(const RunConfig& c) {
    std::ostringstream o;
    o.precision(17);
    o << "gamma = " << c.gamma << "\n";
    o << "case = " << c.field_case << "\n";
    o << "L = " << c.L << "\n";
    o << "ell = " << c.ell << "\n";
    o << "nx = " << c.nx << "\n";
    o << "ny = " << c.ny << "\n";
    o << "J = " << c.J << "\n";
    o << "rho0 = " << c.rho0 << "\n";
    o << "E0 = " << c.E0 << "\n";
    o << "Phi0 = " << c.Phi0 << "\n";
    o << "w_expr = " << c.effective_w_expr() << "\n";
    o << "b_expr = " << c.b_expr << "\n";
    o << "g0_expr = " << c.g0_expr << "\n";
    o << "h0_expr = " << c.h0_expr << "\n";
    o << "vL_expr = " << c.vL_expr << "\n";
    o << "tol = " << c.tol << "\n";
    o << "max_iter = " << c.max_iter << "\n";
    o << "damping = " << c.damping << "\n";
    o << "method = " << c.method << "\n";
    o << "nsteps = " << c.nsteps << "\n";
    o << "background_refine = " << c.background_refine << "\n";
    o << "sonic_floor = " << c.sonic_floor << "\n";
    o << "delta = " << c.delta << "\n";
    o << "lambda = " << c.lambda << "\n";
    o << "n_pairs = " << c.n_pairs << "\n";
    o << "n_t_samples = " << c.n_t_samples << "\n";
    o << "K0 = " << c.K0 << "\n";
    o << "k0 = " << c.k0 << "\n";
    o << "n_starts = " << c.n_starts << "\n";
    o << "guess_scale = " << c.guess_scale << "\n";
    o << "n_trials = " << c.n_trials << "\n";
    o << "seed = " << c.seed << "\n";
    return o.str();
}

} // namespace eplab
