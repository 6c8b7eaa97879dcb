#pragma once

// Scalar nonlinearities of the wave equation: the force f and the damping g.
// Polynomials are odd (f, g are odd functions); a tabulated, piecewise-linear
// monotone g is accepted for the damping.

#include "acoustoplate/errors.hpp"
#include "acoustoplate/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace acoustoplate {

struct NonlinearitySpec {
    enum class Kind { OddPolynomial, Tabulated };

    Kind kind = Kind::OddPolynomial;
    std::vector<double> odd_coeffs;  // c1, c3, c5, ... multiplying s, s^3, s^5, ...
    std::vector<double> table_s;     // strictly increasing abscissae
    std::vector<double> table_values;

    static NonlinearitySpec odd_polynomial(std::vector<double> coeffs) {
        NonlinearitySpec s;
        s.kind = Kind::OddPolynomial;
        s.odd_coeffs = std::move(coeffs);
        return s;
    }

    static NonlinearitySpec tabulated(std::vector<double> s, std::vector<double> values) {
        if (s.size() != values.size() || s.size() < 2)
            throw ConfigError("tabulated nonlinearity: need >= 2 (s, value) pairs of equal length");
        for (std::size_t i = 1; i < s.size(); ++i)
            if (!(s[i] > s[i - 1])) throw ConfigError("tabulated nonlinearity: abscissae must be strictly increasing");
        NonlinearitySpec out;
        out.kind = Kind::Tabulated;
        out.table_s = std::move(s);
        out.table_values = std::move(values);
        return out;
    }

    bool is_polynomial() const { return kind == Kind::OddPolynomial; }

    Polynomial polynomial() const {
        std::vector<double> c(2 * odd_coeffs.size() + 1, 0.0);
        for (std::size_t k = 0; k < odd_coeffs.size(); ++k) c[2 * k + 1] = odd_coeffs[k];
        return Polynomial(c);
    }

    double value(double s) const {
        if (kind == Kind::OddPolynomial) {
            const double s2 = s * s;
            double acc = 0.0;
            for (auto it = odd_coeffs.rbegin(); it != odd_coeffs.rend(); ++it) acc = acc * s2 + *it;
            return acc * s;
        }
        const std::size_t k = segment(s);
        return table_values[k] + slope(k) * (s - table_s[k]);
    }

    double derivative(double s) const {
        if (kind == Kind::OddPolynomial) {
            const double s2 = s * s;
            double acc = 0.0;
            for (std::size_t k = odd_coeffs.size(); k-- > 0;) acc = acc * s2 + static_cast<double>(2 * k + 1) * odd_coeffs[k];
            return acc;
        }
        return slope(segment(s));
    }

    /// Polynomial degree (growth exponent); 1 for tabulated tables (linear extrapolation).
    int degree() const {
        if (kind == Kind::Tabulated) return 1;
        const int d = polynomial().degree();
        return d < 0 ? 0 : d;
    }

    std::string describe() const {
        std::ostringstream os;
        if (kind == Kind::OddPolynomial) {
            os << "odd_polynomial[";
            for (std::size_t k = 0; k < odd_coeffs.size(); ++k) os << (k ? ", " : "") << odd_coeffs[k];
            os << "]";
        } else {
            os << "tabulated(" << table_s.size() << " nodes)";
        }
        return os.str();
    }

private:
    std::size_t segment(double s) const {
        auto it = std::upper_bound(table_s.begin(), table_s.end(), s);
        std::size_t k = it == table_s.begin() ? 0 : static_cast<std::size_t>(it - table_s.begin()) - 1;
        return std::min(k, table_s.size() - 2);
    }
    double slope(std::size_t k) const {
        return (table_values[k + 1] - table_values[k]) / (table_s[k + 1] - table_s[k]);
    }
};

enum class AssumptionLevel { Basic = 0, Attractor = 1, Dimension = 2 };
enum class NonlinearityRole { Damping, Force };

inline const char* to_string(AssumptionLevel l) {
    switch (l) {
    case AssumptionLevel::Basic: return "basic";
    case AssumptionLevel::Attractor: return "attractor";
    case AssumptionLevel::Dimension: return "dimension";
    }
    return "?";
}

/// Outcome of checking a nonlinearity against the three assumption levels.
/// Levels above the requested one are not evaluated and stay false.
struct ValidationReport {
    NonlinearityRole role = NonlinearityRole::Damping;
    AssumptionLevel requested = AssumptionLevel::Basic;
    bool basic = false;
    bool attractor = false;
    bool dimension = false;
    std::vector<std::string> failures;
    std::vector<std::string> witnesses;

    // Damping constants (lower/upper derivative bounds) and growth exponent.
    double m = std::numeric_limits<double>::quiet_NaN();
    double M = std::numeric_limits<double>::quiet_NaN();
    double sigma = std::numeric_limits<double>::quiet_NaN();
    int growth_exponent = 0;
    /// c_eps for eps = 1, 0.1, 0.01 in s^2 <= eps + c_eps s g(s) (damping only).
    std::vector<std::pair<double, double>> c_eps;

    bool holds(AssumptionLevel l) const {
        switch (l) {
        case AssumptionLevel::Basic: return basic;
        case AssumptionLevel::Attractor: return basic && attractor;
        case AssumptionLevel::Dimension: return basic && attractor && dimension;
        }
        return false;
    }

    bool ok() const { return holds(requested); }

    std::string summary() const {
        std::ostringstream os;
        os << (role == NonlinearityRole::Damping ? "g" : "f") << ": basic=" << basic << " attractor=" << attractor
           << " dimension=" << dimension;
        for (const auto& f : failures) os << "; " << f;
        return os.str();
    }
};

namespace detail {

/// Smallest admissible c_eps = sup_{s^2 > eps} (s^2 - eps) / (s g(s)), sampled on a log grid
/// plus the limit at infinity.
inline double sample_c_eps(const NonlinearitySpec& g, double eps) {
    double best = 0.0;
    const double s0 = std::sqrt(eps);
    for (int sign : {-1, 1}) {
        for (int i = 1; i <= 4000; ++i) {
            const double s = sign * s0 * std::pow(1e4, i / 4000.0);
            const double sg = s * g.value(s);
            if (sg <= 0.0) return std::numeric_limits<double>::infinity();
            best = std::max(best, (s * s - eps) / sg);
        }
    }
    // The ratio tends to s/g(s) at infinity; for linear polynomials that limit is the supremum.
    if (g.is_polynomial() && g.degree() == 1) best = std::max(best, 1.0 / g.odd_coeffs.front());
    return best;
}

inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

} // namespace detail

/// Checks a nonlinearity against the assumption levels up to `level`.
/// Polynomials are checked symbolically (critical points of derivative
/// polynomials); tabulated damping is checked through its difference quotients.
inline ValidationReport validate_assumptions(const NonlinearitySpec& spec, AssumptionLevel level,
                                             NonlinearityRole role = NonlinearityRole::Damping) {
    ValidationReport r;
    r.role = role;
    r.requested = level;
    r.growth_exponent = spec.degree();
    const bool want_attr = level >= AssumptionLevel::Attractor;
    const bool want_dim = level >= AssumptionLevel::Dimension;

    if (role == NonlinearityRole::Force) {
        if (!spec.is_polynomial()) {
            r.failures.push_back("f must be an odd polynomial");
            return r;
        }
        const Polynomial p = spec.polynomial();
        const int d = p.degree();
        // liminf f(s)/s > 0: the leading odd coefficient is positive.
        r.basic = d >= 1 && p.leading() > 0.0;
        if (!r.basic)
            r.failures.push_back("f violates dissipativity: liminf f(s)/s must be positive (leading coefficient " +
                                 detail::fmt(p.leading()) + ")");
        else
            r.witnesses.push_back("liminf f(s)/s = " + (d >= 3 ? std::string("+inf") : detail::fmt(p.leading())));
        r.growth_exponent = std::max(0, d - 1);
        if (want_attr) r.attractor = r.basic;
        if (want_dim) {
            r.dimension = r.basic;  // polynomial f is C^2 with polynomial f'' growth
            if (r.dimension) r.witnesses.push_back("f in C^2 with |f''| of degree " + std::to_string(std::max(0, d - 2)));
        }
        return r;
    }

    // --- damping g ---
    if (spec.is_polynomial()) {
        const Polynomial g = spec.polynomial();
        const Polynomial dg = g.derivative();
        const auto [min_dg, at] = dg.global_min();
        const bool monotone = min_dg >= 0.0;
        r.basic = monotone;
        if (!monotone)
            r.failures.push_back("g is not non-decreasing: g'(" + detail::fmt(at) + ") = " + detail::fmt(min_dg) + " < 0");
        else
            r.witnesses.push_back("min g' = " + detail::fmt(min_dg) + " at s = " + detail::fmt(at) + "; g(0) = 0");
        r.m = min_dg;

        if (want_attr) {
            // s g(s) > 0 for s != 0 and liminf g(s)/s > 0, i.e. h(s) = g(s)/s positive off 0 with positive leading term.
            std::vector<double> hc;
            for (std::size_t k = 0; k < spec.odd_coeffs.size(); ++k) {
                hc.push_back(spec.odd_coeffs[k]);
                hc.push_back(0.0);
            }
            const Polynomial h(hc);
            bool ok = r.basic && h.degree() >= 0 && h.leading() > 0.0;
            for (double root : h.real_roots())
                if (std::abs(root) > 1e-12) ok = false;
            if (ok && h.global_min().first < 0.0) ok = false;
            r.attractor = ok;
            if (!ok) {
                r.failures.push_back("g violates s^2 <= eps + c_eps s g(s): need s g(s) > 0 for s != 0 and liminf g(s)/s > 0");
            } else {
                for (double eps : {1.0, 0.1, 0.01}) r.c_eps.emplace_back(eps, detail::sample_c_eps(spec, eps));
                r.witnesses.push_back("c_eps(eps=1) = " + detail::fmt(r.c_eps.front().second));
            }
        }
        if (want_dim) {
            const int p = std::max(1, g.degree());
            r.sigma = static_cast<double>(p - 1) / static_cast<double>(p + 1);
            double M = 0.0;
            for (int i = -2000; i <= 2000; ++i) {
                const double s = (i < 0 ? -1.0 : 1.0) * (std::pow(1e3, std::abs(i) / 2000.0) - 1.0);
                M = std::max(M, spec.derivative(s) / std::pow(1.0 + s * spec.value(s), r.sigma));
            }
            r.M = M;
            r.dimension = r.attractor && r.m > 0.0 && std::isfinite(M);
            if (!(r.m > 0.0))
                r.failures.push_back("g violates the lower derivative bound: m = inf g' = " + detail::fmt(r.m) + " must be > 0");
            else
                r.witnesses.push_back("m = " + detail::fmt(r.m) + ", M = " + detail::fmt(M) + ", sigma = " + detail::fmt(r.sigma));
        }
        return r;
    }

    // Tabulated g: sampled checks over the table range.
    const auto& s = spec.table_s;
    double min_q = std::numeric_limits<double>::infinity(), max_q = 0.0;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        const double q = (spec.table_values[k + 1] - spec.table_values[k]) / (s[k + 1] - s[k]);
        min_q = std::min(min_q, q);
        max_q = std::max(max_q, q);
    }
    const double g0 = spec.value(0.0);
    r.m = min_q;
    r.basic = min_q >= 0.0 && std::abs(g0) <= 1e-14;
    if (min_q < 0.0) r.failures.push_back("g is not non-decreasing on the table (difference quotient " + detail::fmt(min_q) + ")");
    if (std::abs(g0) > 1e-14) r.failures.push_back("g(0) must vanish (table gives " + detail::fmt(g0) + ")");
    if (r.basic) r.witnesses.push_back("difference quotients in [" + detail::fmt(min_q) + ", " + detail::fmt(max_q) + "] over table");
    if (want_attr) {
        bool ok = r.basic;
        const int samples = 2000;
        for (int i = 0; i <= samples && ok; ++i) {
            const double x = s.front() + (s.back() - s.front()) * i / samples;
            if (x != 0.0 && x * spec.value(x) <= 0.0) ok = false;
        }
        // Linear extrapolation: liminf g(s)/s equals the end slopes.
        const double left = (spec.table_values[1] - spec.table_values[0]) / (s[1] - s[0]);
        const double right = (spec.table_values.back() - spec.table_values[s.size() - 2]) / (s.back() - s[s.size() - 2]);
        ok = ok && left > 0.0 && right > 0.0;
        r.attractor = ok;
        if (!ok) r.failures.push_back("g violates s^2 <= eps + c_eps s g(s) on the sampled range");
        else
            for (double eps : {1.0, 0.1, 0.01}) r.c_eps.emplace_back(eps, detail::sample_c_eps(spec, eps));
    }
    if (want_dim) {
        r.sigma = 0.0;
        r.M = max_q;
        r.dimension = r.attractor && min_q > 0.0;
        if (!(min_q > 0.0)) r.failures.push_back("g violates the lower derivative bound: m = " + detail::fmt(min_q));
    }
    return r;
}

} // namespace acoustoplate
