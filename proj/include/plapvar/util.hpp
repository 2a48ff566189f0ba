#pragma once

#include <cmath>

namespace plapvar {

/// sign(s) |s|^e, with the value 0 at s = 0 for every exponent.
inline double signed_pow(double s, double e) {
    if (s == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(s), e), s);
}

inline double sign(double s) { return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0); }

}  // namespace plapvar
