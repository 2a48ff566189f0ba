#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace plapvar {

/// A real number or one of the sentinels +inf / -inf. Used wherever a
/// quantity may legitimately diverge (the potential integral, Phi, limsups).
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;
    constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit by intent

    static constexpr ExtendedReal plus_infinity() { return {std::numeric_limits<double>::infinity()}; }
    static constexpr ExtendedReal minus_infinity() { return {-std::numeric_limits<double>::infinity()}; }

    constexpr double value() const { return value_; }
    bool finite() const { return std::isfinite(value_); }
    bool is_plus_infinity() const { return value_ == std::numeric_limits<double>::infinity(); }
    bool is_minus_infinity() const { return value_ == -std::numeric_limits<double>::infinity(); }
    bool is_sentinel() const { return std::isinf(value_); }

    friend bool operator==(const ExtendedReal &a, const ExtendedReal &b) { return a.value_ == b.value_; }

    std::string str() const {
        if (is_plus_infinity()) return "+inf";
        if (is_minus_infinity()) return "-inf";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", value_);
        return buf;
    }

private:
    double value_ = 0.0;
};

/// Value of the potential F(x,s); infinite only when the integral diverges.
using PotentialValue = ExtendedReal;

}  // namespace plapvar
