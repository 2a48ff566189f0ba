#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "plapvar/field.hpp"
#include "plapvar/mesh.hpp"

namespace plapvar::testing {

/// Field with coefficients drawn uniformly from [-1, 1].
inline DiscreteField random_field(const MeshPtr &mesh, std::mt19937_64 &rng, double scale = 1.0) {
    std::uniform_real_distribution<double> unif(-scale, scale);
    DiscreteField u(mesh);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = unif(rng);
    return u;
}

/// Central difference of J along e_j with step h.
inline double central_difference(const std::function<double(const DiscreteField &)> &J, const DiscreteField &u,
                                 std::size_t j, double h = 1e-6) {
    DiscreteField up = u, um = u;
    up[j] += h;
    um[j] -= h;
    return (J(up) - J(um)) / (2.0 * h);
}

inline double rel_err(double a, double b, double floor = 1e-12) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace plapvar::testing
