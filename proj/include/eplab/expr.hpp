#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "eplab/errors.hpp"
#include "eplab/problem.hpp"

namespace eplab {

// Fixed-basis 1D expressions for coefficients and boundary data:
//   expr   := term (('+'|'-') term)*
//   term   := coefficient ['*' basis]
//   basis  := 'x' | 'x^K' | 'cosK' | 'sin3_K'
// with cosK = cos(K pi x / len) and sin3_K = sin^3(K pi x / len); `len` is
// the length of the interval the expression lives on. Everything (values,
// two derivatives, the antiderivative from 0) evaluates in closed form, so
// compatibility checks are exact and runs reproduce bit-for-bit.
class BasisExpr {
  public:
    BasisExpr() = default;

    static BasisExpr parse(const std::string& text, double len) {
        BasisExpr e;
        e.len_ = len;
        const char* p = text.c_str();
        const char* end = p + text.size();
        auto skip_ws = [&] { while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p; };
        skip_ws();
        if (p == end) throw ConfigError("empty expression");
        bool first = true;
        while (p < end) {
            double sign = 1.0;
            skip_ws();
            if (!first || *p == '+' || *p == '-') {
                if (p == end || (*p != '+' && *p != '-'))
                    throw ConfigError("expected '+' or '-' in expression '" + text + "'");
                sign = (*p == '-') ? -1.0 : 1.0;
                ++p;
                skip_ws();
            }
            first = false;
            double coef = 0.0;
            auto res = std::from_chars(p, end, coef);
            if (res.ec != std::errc())
                throw ConfigError("expected a coefficient in expression '" + text + "'");
            p = res.ptr;
            Term t;
            t.coef = sign * coef;
            t.kind = Kind::poly;
            t.k = 0;
            if (p < end && *p == '*') {
                ++p;
                const char* b = p;
                while (p < end && (std::isalnum(static_cast<unsigned char>(*p)) || *p == '^' ||
                                   *p == '_'))
                    ++p;
                t = parse_basis(std::string(b, p), t.coef, text);
            }
            e.terms_.push_back(t);
            skip_ws();
        }
        return e;
    }

    double value(double x) const {
        double s = 0.0;
        for (const auto& t : terms_) s += t.coef * basis_value(t, x);
        return s;
    }

    double deriv(double x) const {
        double s = 0.0;
        for (const auto& t : terms_) s += t.coef * basis_deriv(t, x);
        return s;
    }

    double deriv2(double x) const {
        double s = 0.0;
        for (const auto& t : terms_) s += t.coef * basis_deriv2(t, x);
        return s;
    }

    // int_0^x of the expression
    double antideriv(double x) const {
        double s = 0.0;
        for (const auto& t : terms_) s += t.coef * basis_antideriv(t, x);
        return s;
    }

    BoundaryFunction as_boundary_function() const {
        BasisExpr copy = *this;
        return {[copy](double x) { return copy.value(x); },
                [copy](double x) { return copy.deriv(x); },
                [copy](double x) { return copy.deriv2(x); },
                [copy](double x) { return copy.antideriv(x); }};
    }

  private:
    enum class Kind { poly, cosine, sin3 };
    struct Term {
        double coef = 0.0;
        Kind kind = Kind::poly;
        int k = 0;
    };

    static Term parse_basis(const std::string& b, double coef, const std::string& ctx) {
        Term t;
        t.coef = coef;
        auto parse_int = [&](const std::string& s) {
            int v = 0;
            auto r = std::from_chars(s.data(), s.data() + s.size(), v);
            if (r.ec != std::errc() || r.ptr != s.data() + s.size() || v < 0)
                throw ConfigError("bad basis index in expression '" + ctx + "'");
            return v;
        };
        if (b == "x") {
            t.kind = Kind::poly;
            t.k = 1;
        } else if (b.rfind("x^", 0) == 0) {
            t.kind = Kind::poly;
            t.k = parse_int(b.substr(2));
        } else if (b.rfind("sin3_", 0) == 0) {
            t.kind = Kind::sin3;
            t.k = parse_int(b.substr(5));
        } else if (b.rfind("cos", 0) == 0) {
            t.kind = Kind::cosine;
            t.k = parse_int(b.substr(3));
        } else {
            throw ConfigError("unknown basis '" + b + "' in expression '" + ctx +
                              "' (use x, x^K, cosK, sin3_K)");
        }
        return t;
    }

    double freq(const Term& t) const { return t.k * M_PI / len_; }

    double basis_value(const Term& t, double x) const {
        switch (t.kind) {
        case Kind::poly: return std::pow(x, t.k);
        case Kind::cosine: return std::cos(freq(t) * x);
        case Kind::sin3: {
            const double s = std::sin(freq(t) * x);
            return s * s * s;
        }
        }
        return 0.0;
    }

    double basis_deriv(const Term& t, double x) const {
        switch (t.kind) {
        case Kind::poly: return t.k == 0 ? 0.0 : t.k * std::pow(x, t.k - 1);
        case Kind::cosine: return -freq(t) * std::sin(freq(t) * x);
        case Kind::sin3: {
            const double a = freq(t), s = std::sin(a * x), c = std::cos(a * x);
            return 3.0 * a * s * s * c;
        }
        }
        return 0.0;
    }

    double basis_deriv2(const Term& t, double x) const {
        switch (t.kind) {
        case Kind::poly: return t.k < 2 ? 0.0 : double(t.k) * (t.k - 1) * std::pow(x, t.k - 2);
        case Kind::cosine: {
            const double a = freq(t);
            return -a * a * std::cos(a * x);
        }
        case Kind::sin3: {
            const double a = freq(t), s = std::sin(a * x), c = std::cos(a * x);
            return 3.0 * a * a * s * (2.0 * c * c - s * s);
        }
        }
        return 0.0;
    }

    double basis_antideriv(const Term& t, double x) const {
        switch (t.kind) {
        case Kind::poly: return std::pow(x, t.k + 1) / (t.k + 1);
        case Kind::cosine: {
            const double a = freq(t);
            if (t.k == 0) return x;
            return std::sin(a * x) / a;
        }
        case Kind::sin3: {
            const double a = freq(t);
            if (t.k == 0) return 0.0;
            const double c = std::cos(a * x);
            return (1.0 - c) / a - (1.0 - c * c * c) / (3.0 * a);
        }
        }
        return 0.0;
    }

    double len_ = 1.0;
    std::vector<Term> terms_;
};

} // namespace eplab
