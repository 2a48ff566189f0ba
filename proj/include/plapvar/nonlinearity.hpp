#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "plapvar/error.hpp"
#include "plapvar/extended_real.hpp"
#include "plapvar/mesh.hpp"
#include "plapvar/util.hpp"
#include "plapvar/weights.hpp"

namespace plapvar {

/// Closed-form potential written as F(x,s) = mu |s|^e / e + R(x,s). Keeping
/// the power part separate lets G = F - lambda1 |s|^p / p cancel exactly
/// when mu is lambda1.
struct SplitPotential {
    double mu = 0.0;
    double exponent = 2.0;
    std::function<double(const Point &, double)> remainder;
};

/// A Caratheodory nonlinearity f(x,s) with optional closed-form potential
/// and the metadata the condition checks read.
struct NonlinearitySpec {
    std::string name;
    std::function<double(const Point &, double)> f;
    std::optional<SplitPotential> potential;
    /// q in |f| <= a|s|^{q-1} + b; empty means no growth condition is claimed.
    std::optional<double> growth_exponent;
    bool autonomous = true;
    /// Values of s where f is not differentiable (or switches branch).
    std::vector<double> kinks;
    std::map<std::string, double> parameters;
    /// d(x) for paper_example, a(x) for example4.
    std::optional<Weight> density;
    /// eta(x) for the G-bound examples.
    std::optional<Weight> eta;
    std::optional<ComparisonFunction> comparison;
};

namespace detail {

inline std::string at_string(const Point &x, double s) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "x = (%.17g, %.17g), s = %.17g", x[0], x[1], s);
    return buf;
}

// Adaptive tanh-sinh quadrature on [a, b] to absolute tolerance tol. Callers
// cut the range at 0 and at the kinks, so every singularity of f sits at an
// endpoint, where the double-exponential rule keeps full accuracy. A
// 15-point Gauss-Kronrod pass detects overflow and sizes the relative target.
template <class Fn>
double adaptive_integral(Fn &&g, double a, double b, double tol) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double err = 0.0, l1 = 0.0;
    const double rough = GK::integrate(g, a, b, 0, 0.0, &err, &l1);
    if (!std::isfinite(l1)) return rough;
    if (l1 == 0.0) return 0.0;
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    const double rel = std::max(tol / l1, 1e-14);
    std::size_t levels = 0;
    double val = 0.0;
    // Integrate on the rule's native (-1, 1); xc is the signed distance of x
    // to the nearer end, which keeps points next to a and b resolved.
    const double half = 0.5 * (b - a);
    auto h = [&](double x, double xc) { return half * g(x < 0.0 ? a - half * xc : b - half * xc); };
    try {
        val = rule.integrate(h, -1.0, 1.0, rel, &err, &l1, &levels);
    } catch (const std::exception &e) {
        throw Error("nonlinearity", "eval_F", std::string("quadrature failed: ") + e.what());
    }
    if (std::isfinite(val) && err > std::max(tol, 1e-8 * l1))
        throw Error("nonlinearity", "eval_F", "quadrature did not converge");
    return val;
}

}  // namespace detail

/// f(x,s); a non-finite value is an error naming the point.
inline double eval_f(const NonlinearitySpec &spec, const Point &x, double s) {
    const double v = spec.f(x, s);
    if (!std::isfinite(v))
        throw Error("nonlinearity", "eval_f", spec.name + ": non-finite f at " + detail::at_string(x, s));
    return v;
}

/// F(x,s) by integrating f from 0 to s (absolute tolerance 1e-10, split at
/// the declared kinks), ignoring any closed form.
inline PotentialValue eval_F_quadrature(const NonlinearitySpec &spec, const Point &x, double s) {
    if (s == 0.0) return 0.0;
    const double lo = std::min(0.0, s), hi = std::max(0.0, s);
    std::vector<double> cuts{lo};
    for (double k : spec.kinks)
        if (k > lo && k < hi) cuts.push_back(k);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    auto g = [&](double t) { return spec.f(x, t); };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double len = cuts[i + 1] - cuts[i];
        total += detail::adaptive_integral(g, cuts[i], cuts[i + 1], 1e-10 * len / (hi - lo));
    }
    if (std::isnan(total))
        throw Error("nonlinearity", "eval_F", spec.name + ": undefined integral at " + detail::at_string(x, s));
    return s > 0.0 ? total : -total;
}

/// F(x,s): the closed form when the spec has one, quadrature otherwise.
/// Overflow of the integral is reported as the matching sentinel.
inline PotentialValue eval_F(const NonlinearitySpec &spec, const Point &x, double s) {
    if (!spec.potential) return eval_F_quadrature(spec, x, s);
    const auto &pot = *spec.potential;
    double v = pot.remainder ? pot.remainder(x, s) : 0.0;
    if (pot.mu != 0.0) v += pot.mu * std::pow(std::abs(s), pot.exponent) / pot.exponent;
    if (std::isnan(v))
        throw Error("nonlinearity", "eval_F", spec.name + ": undefined potential at " + detail::at_string(x, s));
    return v;
}

/// G(x,s) = F(x,s) - lambda1 |s|^p / p. Sentinels of F pass through.
inline PotentialValue eval_G(const NonlinearitySpec &spec, const Point &x, double s, double lambda1, double p) {
    const double sp = std::pow(std::abs(s), p) / p;
    if (spec.potential && spec.potential->exponent == p) {
        const auto &pot = *spec.potential;
        double v = pot.remainder ? pot.remainder(x, s) : 0.0;
        if (pot.mu != lambda1) v += (pot.mu - lambda1) * sp;
        if (std::isnan(v))
            throw Error("nonlinearity", "eval_G", spec.name + ": undefined potential at " + detail::at_string(x, s));
        return v;
    }
    const PotentialValue F = eval_F(spec, x, s);
    if (F.is_sentinel()) return F;
    const double v = F.value() - lambda1 * sp;
    if (std::isnan(v)) return ExtendedReal::minus_infinity();
    return v;
}

namespace catalog {

namespace detail {

inline void require(bool ok, const char *op, const std::string &msg) {
    if (!ok) throw Error("nonlinearity", op, msg);
}

inline void require_p(const char *op, double p) { require(p > 1.0 && std::isfinite(p), op, "p must exceed 1"); }

}  // namespace detail

/// f with F = 0 for every s.
inline NonlinearitySpec zero() {
    NonlinearitySpec s;
    s.name = "zero";
    s.f = [](const Point &, double) { return 0.0; };
    s.potential = SplitPotential{0.0, 2.0, nullptr};
    s.growth_exponent = 2.0;
    return s;
}

/// f = mu |s|^{p-2} s, F = mu |s|^p / p.
inline NonlinearitySpec power_law(double mu, double p) {
    detail::require_p("power_law", p);
    NonlinearitySpec s;
    s.name = "power_law";
    s.f = [mu, p](const Point &, double t) { return mu * signed_pow(t, p - 1.0); };
    s.potential = SplitPotential{mu, p, nullptr};
    s.growth_exponent = p;
    s.parameters = {{"mu", mu}, {"p", p}};
    return s;
}

/// The oscillating, exponentially growing example with density d >= 0:
/// F <= 0 everywhere yet f obeys no polynomial growth bound.
inline NonlinearitySpec paper_example(Weight d) {
    detail::require(d.exponent >= 1.0, "paper_example", "d must be declared locally integrable (exponent >= 1)");
    NonlinearitySpec s;
    s.name = "paper_example";
    constexpr double pi = std::numbers::pi;
    s.f = [d](const Point &x, double t) {
        const double a = std::abs(t);
        double g;
        if (a >= 1.0)
            g = (std::sin(pi * t / 2.0) - sign(t) / 2.0) * std::exp(2.0 * std::cos(pi * t / 2.0) / pi + (a - 1.0) / 2.0);
        else
            g = t / 2.0 * (10.0 * t * t - 9.0);
        return d(x) * g;
    };
    s.potential = SplitPotential{0.0, 2.0, [d](const Point &x, double t) {
                                     const double a = std::abs(t);
                                     double g;
                                     if (a >= 1.0)
                                         g = -std::exp(2.0 * std::cos(pi * t / 2.0) / pi) * std::exp((a - 1.0) / 2.0);
                                     else
                                         g = -t * t / 4.0 * (9.0 - 5.0 * t * t);
                                     const double w = d(x);
                                     return w == 0.0 ? 0.0 : w * g;
                                 }};
    s.autonomous = d.constant;
    s.kinks = {-1.0, 1.0};
    s.density = std::move(d);
    return s;
}

/// f = lambda1 |s|^{p-2}s - beta |s|^{beta-2}s, so G = -|s|^beta.
inline NonlinearitySpec power_perturbation(double lambda1, double beta, double p) {
    detail::require_p("power_perturbation", p);
    detail::require(beta > 1.0 && beta < p, "power_perturbation", "require 1 < beta < p");
    detail::require(lambda1 > 0.0, "power_perturbation", "lambda1 must be positive");
    NonlinearitySpec s;
    s.name = "power_perturbation";
    s.f = [=](const Point &, double t) { return lambda1 * signed_pow(t, p - 1.0) - beta * signed_pow(t, beta - 1.0); };
    s.potential = SplitPotential{lambda1, p, [beta](const Point &, double t) { return -std::pow(std::abs(t), beta); }};
    s.growth_exponent = p;
    s.parameters = {{"lambda1", lambda1}, {"beta", beta}, {"p", p}};
    return s;
}

/// F = lambda1 |s|^p / p + eta(x) phi(s).
inline NonlinearitySpec eta_phi(Weight eta, ComparisonFunction phi, double lambda1, double p) {
    detail::require_p("eta_phi", p);
    detail::require(phi.order >= 1.0 && phi.order <= p, "eta_phi", "comparison order must lie in [1, p]");
    detail::require(eta.exponent >= 1.0, "eta_phi", "eta must be declared integrable (exponent >= 1)");
    NonlinearitySpec s;
    s.name = "eta_phi";
    s.f = [=](const Point &x, double t) { return lambda1 * signed_pow(t, p - 1.0) + eta(x) * phi.derivative(t); };
    s.potential = SplitPotential{lambda1, p, [eta, phi](const Point &x, double t) { return eta(x) * phi(t); }};
    s.growth_exponent = p;
    s.autonomous = eta.constant;
    s.kinks = phi.kinks;
    s.parameters = {{"lambda1", lambda1}, {"alpha", phi.order}, {"p", p}};
    s.eta = std::move(eta);
    s.comparison = std::move(phi);
    return s;
}

/// F = lambda1 |s|^p / p + eta(x) |s|.
inline NonlinearitySpec eta_linear(Weight eta, double lambda1, double p) {
    detail::require_p("eta_linear", p);
    detail::require(eta.exponent >= 1.0, "eta_linear", "eta must be declared integrable (exponent >= 1)");
    NonlinearitySpec s;
    s.name = "eta_linear";
    s.f = [=](const Point &x, double t) { return lambda1 * signed_pow(t, p - 1.0) + eta(x) * sign(t); };
    s.potential = SplitPotential{lambda1, p, [eta](const Point &x, double t) { return eta(x) * std::abs(t); }};
    s.growth_exponent = p;
    s.autonomous = eta.constant;
    s.kinks = {0.0};
    s.parameters = {{"lambda1", lambda1}, {"p", p}};
    s.eta = std::move(eta);
    return s;
}

/// F = (lambda1/p + a(x)) |s|^p + (phi(s) |s|^p)^{1/2} with a <= 0.
/// The coefficient multiplies |s|^p; a sum reading would leave G of order
/// |s|^p with a positive constant and break the intended G-bounds.
inline NonlinearitySpec example4(Weight a, ComparisonFunction phi, double lambda1, double p) {
    detail::require_p("example4", p);
    detail::require(phi.order >= 1.0 && phi.order <= p, "example4", "comparison order must lie in [1, p]");
    NonlinearitySpec s;
    s.name = "example4";
    auto root = [phi, p](double t) { return std::sqrt(phi(t)) * std::pow(std::abs(t), p / 2.0); };
    s.f = [=](const Point &x, double t) {
        double v = (lambda1 + p * a(x)) * signed_pow(t, p - 1.0);
        if (t != 0.0) {
            const double ph = phi(t);
            const double half = std::pow(std::abs(t), p / 2.0);
            if (ph > 0.0) v += phi.derivative(t) / (2.0 * std::sqrt(ph)) * half;
            v += std::sqrt(ph) * (p / 2.0) * signed_pow(t, p / 2.0 - 1.0);
        }
        return v;
    };
    s.potential = SplitPotential{lambda1, p, [a, root, p](const Point &x, double t) {
                                     return a(x) * std::pow(std::abs(t), p) + root(t);
                                 }};
    s.growth_exponent = p;
    s.autonomous = a.constant;
    s.kinks = phi.kinks;
    s.parameters = {{"lambda1", lambda1}, {"alpha", phi.order}, {"p", p}};
    s.density = std::move(a);
    s.comparison = std::move(phi);
    return s;
}

/// Wraps user callables. F, when given, is taken as the full potential.
inline NonlinearitySpec from_functions(std::string name, std::function<double(const Point &, double)> f,
                                       std::function<double(const Point &, double)> F = nullptr,
                                       bool autonomous = true) {
    NonlinearitySpec s;
    s.name = std::move(name);
    s.f = std::move(f);
    if (F) s.potential = SplitPotential{0.0, 2.0, std::move(F)};
    s.autonomous = autonomous;
    return s;
}

}  // namespace catalog

}  // namespace plapvar
