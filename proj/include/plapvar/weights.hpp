#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>
#include <utility>

#include "plapvar/error.hpp"
#include "plapvar/mesh.hpp"
#include "plapvar/util.hpp"

namespace plapvar {

/// A coefficient function of x (d, eta, a) with its declared integrability:
/// the weight is asserted to lie in L^exponent(Omega). Integrability is not
/// verified numerically.
struct Weight {
    std::function<double(const Point &)> eval;
    double exponent = std::numeric_limits<double>::infinity();
    std::string label;
    bool constant = false;

    double operator()(const Point &x) const { return eval(x); }

    static Weight constant_value(double c) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", c);
        return {[c](const Point &) { return c; }, std::numeric_limits<double>::infinity(), buf, true};
    }
};

/// Even, nonnegative function of s compared against |s|^alpha.
struct ComparisonFunction {
    std::string name;
    double order = 1.0;
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    /// Points where the derivative jumps.
    std::vector<double> kinks;

    double operator()(double s) const { return value(s); }

    /// |s|^alpha.
    static ComparisonFunction power(double alpha) {
        if (!(alpha >= 1.0)) throw Error("conditions", "ComparisonFunction", "order must be at least 1");
        return {"power", alpha, [alpha](double s) { return std::pow(std::abs(s), alpha); },
                [alpha](double s) { return alpha * signed_pow(s, alpha - 1.0); },
                {}};
    }

    /// |s|^alpha |log|s||, with the value 0 at s = 0.
    static ComparisonFunction power_log(double alpha) {
        if (!(alpha > 1.0)) throw Error("conditions", "ComparisonFunction", "power_log needs order above 1");
        return {"power_log", alpha,
                [alpha](double s) {
                    const double a = std::abs(s);
                    return a == 0.0 ? 0.0 : std::pow(a, alpha) * std::abs(std::log(a));
                },
                [alpha](double s) {
                    const double a = std::abs(s);
                    if (a == 0.0) return 0.0;
                    const double l = std::log(a);
                    const double d = std::pow(a, alpha - 1.0) * (alpha * std::abs(l) + sign(l));
                    return s > 0 ? d : -d;
                },
                {-1.0, 1.0}};
    }
};

}  // namespace plapvar
