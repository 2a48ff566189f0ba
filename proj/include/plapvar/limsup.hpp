#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "plapvar/error.hpp"
#include "plapvar/extended_real.hpp"

namespace plapvar {

enum class Direction { plus, minus };

inline const char *to_string(Direction d) { return d == Direction::plus ? "+inf" : "-inf"; }

/// Geometric samples s_k = +-r 2^k, k = 0..K.
struct LimsupGrid {
    double r = 1.0;
    int K = 40;
};

/// Numerical limsup: the maximum over the last half of the sampled sequence.
struct LimsupEstimate {
    ExtendedReal value;
    Direction direction = Direction::plus;
    LimsupGrid grid;
    bool converged = false;
    /// Clamped samples g(s_k), k = 0..K.
    std::vector<double> samples;
};

namespace detail {

constexpr double sentinel_threshold = 1e12;

inline double clamp_sentinel(double v) {
    if (v > sentinel_threshold) return std::numeric_limits<double>::infinity();
    if (v < -sentinel_threshold) return -std::numeric_limits<double>::infinity();
    return v;
}

inline double tail_max(const std::vector<double> &v, std::size_t from) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = from; k < v.size(); ++k) m = std::max(m, v[k]);
    return m;
}

inline bool tails_agree(double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) < 1e-3 * std::max({std::abs(a), std::abs(b), 1.0});
}

}  // namespace detail

/// limsup of g(s) as s -> +-inf, read off the tail of a geometric grid.
/// Samples beyond +-1e12 become sentinels. The estimate is flagged
/// converged when dropping the first tail sample leaves the tail maximum
/// unchanged (both the same sentinel, or within 1e-3 of the larger of
/// their magnitudes and 1).
inline LimsupEstimate estimate_limsup(const std::function<double(double)> &g, Direction dir,
                                      const LimsupGrid &grid = {}) {
    if (!(grid.r > 0.0)) throw Error("conditions", "estimate_limsup", "grid ratio r must be positive");
    if (grid.K < 8) throw Error("conditions", "estimate_limsup", "grid needs K >= 8");
    LimsupEstimate out;
    out.direction = dir;
    out.grid = grid;
    out.samples.reserve(grid.K + 1);
    const double sgn = dir == Direction::plus ? 1.0 : -1.0;
    for (int k = 0; k <= grid.K; ++k) {
        const double s = sgn * std::ldexp(grid.r, k);
        const double v = g(s);
        if (std::isnan(v))
            throw Error("conditions", "estimate_limsup", "undefined sample at s = " + ExtendedReal(s).str());
        out.samples.push_back(detail::clamp_sentinel(v));
    }
    const std::size_t m = static_cast<std::size_t>((grid.K + 1) / 2);
    const double a = detail::tail_max(out.samples, m);
    const double b = detail::tail_max(out.samples, m + 1);
    out.value = a;
    out.converged = detail::tails_agree(a, b);
    return out;
}

}  // namespace plapvar
